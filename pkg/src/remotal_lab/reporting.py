"""CSV/JSON emission helpers with locale-free, round-trip number formatting."""

import csv
import io
import json
import math
from enum import Enum

import numpy as np


def format_decimal(x):
    """Shortest round-trip positional decimal (no exponent, '.' separator)."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return repr(x)
    if x.is_integer() and abs(x) < 2**53:
        return str(int(x))
    return np.format_float_positional(x, unique=True, trim="-")


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_decimal(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(csv_text(header, rows))


def to_jsonable(obj):
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


def dump_json(obj):
    # json uses repr() for floats: shortest round-trip, full double precision
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"
