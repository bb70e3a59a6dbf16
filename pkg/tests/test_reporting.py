
import numpy as np

from remotal_lab.reporting import csv_text, dump_json, format_decimal, to_jsonable
from remotal_lab.windows import Status


def test_format_decimal_round_trips():
    for v in (0.1, 1 / 3, 1e-7, 2.0**-40, 123456.789):
        assert float(format_decimal(v)) == v
    assert format_decimal(2.0) == "2"
    assert format_decimal(np.int64(7)) == "7"
    assert "e" not in format_decimal(1e-7)


def test_csv_text_uses_format():
    assert csv_text(["a", "b"], [(1, 0.5), (2, 0.25)]) == "a,b\n1,0.5\n2,0.25\n"


def test_json_is_sorted_and_plain():
    obj = {"b": Status.INCONCLUSIVE, "a": np.float64(0.5), "c": np.array([1, 2])}
    assert to_jsonable(obj) == {"b": "Inconclusive", "a": 0.5, "c": [1, 2]}
    assert dump_json(obj).splitlines()[1].strip().startswith('"a"')
    assert dump_json(obj).endswith("\n")
