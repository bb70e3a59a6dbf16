import json
import os

import pytest

from remotal_lab import cli, config, scenarios
from remotal_lab.errors import ConfigError


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


DENSITY = {
    "name": "pow2 squares",
    "operation": "density_trace",
    "predicate": "powers_of_two",
    "window": {"family": "poly_window", "b_exp": 2},
    "horizon": 100,
    "expect": {"verdict.status": "ConvergesToZero"},
}


def test_list_is_stable_and_complete(capsys):
    names = [n for n, _ in scenarios.list_scenarios()]
    for required in ("paper:example-sign-continuity", "paper:example-maximizing", "paper:theorem-z1-battery"):
        assert required in names
    assert names == list(scenarios.BUILTIN)
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert [line.split("\t")[0] for line in out] == names


@pytest.mark.parametrize("bad,path", [
    ({**DENSITY, "window": {"family": "nope"}}, "config.scenarios[0].window.family"),
    ({**DENSITY, "predicate": {"family": "primes"}}, "config.scenarios[0].predicate.family"),
    ({**DENSITY, "horizon": -3}, "config.scenarios[0].horizon"),
    ({**DENSITY, "horizon": 10**9}, "config.scenarios[0].horizon"),
    ({**DENSITY, "operation": "fly"}, "config.scenarios[0].operation"),
    ({k: v for k, v in DENSITY.items() if k != "window"}, "config.scenarios[0].window"),
    ({**DENSITY, "window": {"family": "poly_window", "c": 1}}, "config.scenarios[0].window.c"),
])
def test_config_errors_name_the_key(bad, path):
    with pytest.raises(ConfigError) as exc:
        scenarios.validate(config.load_scenarios({"scenarios": [bad]}))
    assert exc.value.path == path


def test_duplicate_names_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        scenarios.validate([DENSITY, DENSITY])


def test_validate_config_cli(tmp_path, capsys):
    good = write(tmp_path, {"scenarios": [DENSITY]})
    assert cli.main(["validate-config", good]) == 0
    bad = write(tmp_path, {"scenarios": [{**DENSITY, "window": {"family": "nope"}}]}, "bad.json")
    assert cli.main(["validate-config", bad]) == 2
    assert "window.family" in capsys.readouterr().err


def test_invalid_json_is_usage_error(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert cli.main(["validate-config", str(p)]) == 2


def test_missing_file_is_usage_error(tmp_path):
    assert cli.main(["run", str(tmp_path / "absent.json"), "--out", str(tmp_path)]) == 2


def test_run_writes_report_and_trace(tmp_path):
    cfg = write(tmp_path, {"scenarios": [DENSITY]})
    out = tmp_path / "out"
    assert cli.main(["run", cfg, "--out", str(out)]) == 0
    report = json.loads((out / "pow2_squares.json").read_text())
    assert report["passed"] and report["traces"] == {"density": "pow2_squares__density.csv"}
    lines = (out / "pow2_squares__density.csv").read_text().splitlines()
    assert lines[0] == "n,alpha,beta,count,density"
    assert lines[100] == "100,1,10000,13,0.0013"


def test_failed_expectation_exits_nonzero(tmp_path):
    cfg = write(tmp_path, {"scenarios": [{**DENSITY, "expect": {"verdict.status": "DoesNotConverge"}}]})
    assert cli.main(["run", cfg, "--out", str(tmp_path / "o")]) == 1


def test_unwritable_output_reported(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = write(tmp_path, {"scenarios": [DENSITY]})
    assert cli.main(["run", cfg, "--out", str(blocker / "sub")]) == 3
    assert str(blocker) in capsys.readouterr().err


@pytest.mark.parametrize("name", [
    "paper:example-sign-continuity",
    "paper:example-divergence",
    "paper:example-maximizing",
    "paper:example-compactness",
])
def test_builtin_examples_pass(tmp_path, name):
    assert cli.main(["run", name, "--out", str(tmp_path)]) == 0


def test_sign_continuity_report(tmp_path):
    cli.main(["run", "paper:example-sign-continuity", "--out", str(tmp_path)])
    rep = json.loads((tmp_path / "paper_example-sign-continuity.json").read_text())
    assert rep["result"]["preimage"]["status"] == "ConvergesToZero"
    assert rep["result"]["image"]["status"] == "ConvergesToZero"
    assert os.path.exists(tmp_path / rep["traces"]["preimage"])


def test_outputs_are_byte_identical(tmp_path):
    cfg = write(tmp_path, {"scenarios": [
        DENSITY,
        {"name": "batt", "operation": "battery", "battery": "partial_compact", "count": 10},
        {"name": "scan", "operation": "farthest_points", "set": {"interval": [-1, 1]}, "probes": [0, 0.5]},
    ]})
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", cfg, "--out", str(a)]) == 0
    assert cli.main(["run", cfg, "--out", str(b), "--jobs", "2"]) == 0
    names = sorted(os.listdir(a))
    assert names == sorted(os.listdir(b))
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()


def test_seed_override_changes_battery(tmp_path):
    cfg = write(tmp_path, {"scenarios": [{"name": "b", "operation": "battery", "battery": "partial_compact", "count": 5}]})
    cli.main(["run", cfg, "--out", str(tmp_path / "s0")])
    cli.main(["run", cfg, "--out", str(tmp_path / "s1"), "--seed", "1"])
    assert (tmp_path / "s0" / "b.json").read_bytes() != (tmp_path / "s1" / "b.json").read_bytes()


@pytest.mark.parametrize("sc", [
    {"operation": "validate_window_pair", "window": "classical", "horizon": 100, "expect": {"p3": True}},
    {"operation": "ab_stat_converges", "sequence": "alternating", "limit": 1, "eps": 0.5, "window": "classical",
     "horizon": 100, "expect": {"verdict.status": "DoesNotConverge"}},
    {"operation": "x_compact", "x": 0, "set": {"interval": [-1, 1]}, "horizon": 50,
     "expect": {"diam_verdict.status": "DoesNotConverge"}},
    {"operation": "chebyshev_center", "set": {"cloud": [[0, 0], [2, 0]]}},
    {"operation": "partial_compact", "x": 0.5, "set": {"interval": [-1, 1]}, "subset": {"cloud": [[-1]]},
     "expect": {"positive": True}},
    {"operation": "gauge_div", "probe": {"family": "constant", "value": 0}, "x": 0, "y": 10,
     "set": {"cloud": [[0], [10]]}, "window": "classical", "horizon": 100, "expect": {"hypothesis_holds": False}},
    {"operation": "gauge_ratio", "gauge": {"gauge": "power", "p": 1}, "probe": {"family": "constant", "value": 0},
     "x": 0, "y": 0, "set": {"cloud": [[0], [2]]}, "window": "classical", "eps": 0.5, "horizon": 100,
     "expect": {"conclusion_violated": True}},
    {"operation": "maximizing", "sequence": "one_minus_harmonic", "x": 0, "set": {"box": {"lo": [-1], "hi": [1]}},
     "space": {"p": "inf"}, "eps": 0.1, "window": "classical", "horizon": 100, "expect": {"maximizing.maximizing": True}},
])
def test_every_operation_runs(tmp_path, sc):
    sc = {"name": sc["operation"], **sc}
    outcome = scenarios.run_scenario(sc, str(tmp_path))
    assert outcome.passed, outcome.failures
