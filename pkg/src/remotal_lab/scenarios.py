"""Scenario runner and the built-in reference scenarios.

A scenario is a JSON object with a ``name``, an ``operation`` and that
operation's parameters, plus an optional ``expect`` map from dotted result
paths to expected values. Running one writes ``<slug>.json`` and one
``<slug>__<trace>.csv`` per trace into the output directory.
"""

from __future__ import annotations

import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import batteries
from .compactness import attainment_check, max_chebyshev_check, partial_ab_compact_check, x_ab_compact_verdict, x_compact_verdict
from .config import (
    load_scenarios,
    number,
    optional_int,
    parse_function,
    parse_gauge,
    parse_point,
    parse_predicate,
    parse_sequence,
    parse_set,
    parse_space,
    parse_window,
    require,
)
from .errors import ConfigError
from .gauge import remotality_hypothesis_div, remotality_hypothesis_ratio
from .geometry import chebyshev_center, farthest_distance, remotality_scan
from .reporting import dump_json, to_jsonable
from .seqlab import (
    DEFAULT_BOUND_GRID,
    ab_stat_converges,
    ab_stat_diverges_to_inf,
    is_ab_stat_maximizing,
    is_maximizing,
    partial_ab_stat_continuity,
)
from .windows import (
    DEFAULT_TOLERANCE,
    density_trace,
    enumeration_cap,
    validate_window_pair,
    verdict_converges_to_zero,
)


def _horizon(sc, path, key="horizon", default=None):
    h = number(sc, key, path, default=default, integer=True, positive=True)
    cap = enumeration_cap()
    if h > cap:
        raise ConfigError(f"{path}.{key}", f"horizon {h} exceeds the global cap {cap}")
    return h


def _common(sc, path):
    return {
        "tolerance": number(sc, "tolerance", path, default=DEFAULT_TOLERANCE, positive=True),
        "trend_window": optional_int(sc, "trend_window", path),
    }


def _geometry(sc, path):
    S = parse_set(require(sc, "set", path), f"{path}.set")
    space = parse_space(sc.get("space"), f"{path}.space", S.dim)
    return S, space


# ---------------------------------------------------------------------------
# operations: parse(sc, path) -> kwargs, run(kwargs, seed) -> (result, traces)


def _p_validate(sc, path):
    return {"pair": parse_window(require(sc, "window", path), f"{path}.window"), "horizon": _horizon(sc, path)}


def _r_validate(kw, seed):
    return validate_window_pair(kw["pair"], kw["horizon"]).to_dict(), {}


def _p_density(sc, path):
    return {
        "pred": parse_predicate(require(sc, "predicate", path), f"{path}.predicate"),
        "pair": parse_window(require(sc, "window", path), f"{path}.window"),
        "horizon": _horizon(sc, path),
        **_common(sc, path),
    }


def _r_density(kw, seed):
    tr = density_trace(kw["pred"], kw["pair"], kw["horizon"])
    v = verdict_converges_to_zero(tr, kw["tolerance"], kw["trend_window"])
    return {"verdict": v.to_dict(), "certified": tr.certified}, {"density": tr.to_csv()}


def _p_converges(sc, path):
    return {
        "seq": parse_sequence(require(sc, "sequence", path), f"{path}.sequence"),
        "limit": number(sc, "limit", path),
        "eps": number(sc, "eps", path, positive=True),
        "pair": parse_window(require(sc, "window", path), f"{path}.window"),
        "horizon": _horizon(sc, path),
        **_common(sc, path),
    }


def _r_converges(kw, seed):
    v = ab_stat_converges(kw["seq"], kw["limit"], kw["eps"], kw["pair"], kw["horizon"], kw["tolerance"], kw["trend_window"])
    return {"verdict": v.to_dict()}, {"deviation": v.trace.to_csv()}


def _p_diverges(sc, path):
    grid = sc.get("bound_grid", list(DEFAULT_BOUND_GRID))
    if not isinstance(grid, list) or not grid or not all(isinstance(m, (int, float)) and m > 0 for m in grid):
        raise ConfigError(f"{path}.bound_grid", "expected a non-empty list of positive numbers")
    return {
        "seq": parse_sequence(require(sc, "sequence", path), f"{path}.sequence"),
        "grid": [float(m) for m in grid],
        "pair": parse_window(require(sc, "window", path), f"{path}.window"),
        "horizon": _horizon(sc, path),
        **_common(sc, path),
    }


def _r_diverges(kw, seed):
    rep = ab_stat_diverges_to_inf(kw["seq"], kw["pair"], kw["horizon"], kw["grid"], kw["tolerance"], kw["trend_window"])
    traces = {f"below_M{m:g}": v.trace.to_csv() for m, v in rep.per_bound}
    return rep.to_dict(), traces


def _p_maximizing(sc, path):
    S, space = _geometry(sc, path)
    return {
        "seq": parse_sequence(require(sc, "sequence", path), f"{path}.sequence"),
        "x": parse_point(require(sc, "x", path), f"{path}.x", S.dim),
        "S": S,
        "space": space,
        "eps": number(sc, "eps", path, positive=True),
        "pair": parse_window(require(sc, "window", path), f"{path}.window"),
        "horizon": _horizon(sc, path),
        "maximizing_horizon": _horizon(sc, path, "maximizing_horizon", default=500),
        **_common(sc, path),
    }


def _r_maximizing(kw, seed):
    ordinary = is_maximizing(kw["seq"], kw["x"], kw["S"], kw["space"], kw["eps"], kw["maximizing_horizon"])
    v = is_ab_stat_maximizing(
        kw["seq"], kw["x"], kw["S"], kw["space"], kw["eps"], kw["pair"], kw["horizon"], kw["tolerance"], kw["trend_window"]
    )
    delta = farthest_distance(kw["x"], kw["S"], kw["space"])
    return {"delta": delta, "maximizing": ordinary.to_dict(), "ab_stat_maximizing": v.to_dict()}, {"deviation": v.trace.to_csv()}


def _p_continuity(sc, path):
    return {
        "f": parse_function(require(sc, "function", path), f"{path}.function"),
        "x": number(sc, "x", path),
        "probe": parse_sequence(require(sc, "probe", path), f"{path}.probe"),
        "pair": parse_window(require(sc, "window", path), f"{path}.window"),
        "eps": number(sc, "eps", path, positive=True),
        "horizon": _horizon(sc, path),
        **_common(sc, path),
    }


def _r_continuity(kw, seed):
    w = partial_ab_stat_continuity(
        kw["f"], kw["x"], kw["probe"], kw["pair"], kw["eps"], kw["horizon"], kw["tolerance"], kw["trend_window"]
    )
    return w.to_dict(), {"preimage": w.preimage.trace.to_csv(), "image": w.image.trace.to_csv()}


def _p_x_compact(sc, path):
    S, space = _geometry(sc, path)
    return {
        "x": parse_point(require(sc, "x", path), f"{path}.x", S.dim),
        "S": S,
        "space": space,
        "horizon": _horizon(sc, path),
        **_common(sc, path),
    }


def _r_x_compact(kw, seed):
    v = x_compact_verdict(kw["x"], kw["S"], kw["space"], kw["horizon"], kw["tolerance"], kw["trend_window"])
    return v.to_dict(), {"slab": v.trace.to_csv()}


def _p_x_ab_compact(sc, path):
    kw = _p_x_compact(sc, path)
    kw.update(
        t_seq=parse_sequence(require(sc, "t_sequence", path), f"{path}.t_sequence"),
        pair=parse_window(require(sc, "window", path), f"{path}.window"),
        eps=number(sc, "eps", path, positive=True),
        with_x_compact=bool(sc.get("with_x_compact", False)),
        x_compact_horizon=_horizon(sc, path, "x_compact_horizon", default=kw["horizon"]),
    )
    return kw


def _r_x_ab_compact(kw, seed):
    v = x_ab_compact_verdict(
        kw["x"], kw["S"], kw["space"], kw["t_seq"], kw["pair"], kw["horizon"], kw["eps"], kw["tolerance"], kw["trend_window"]
    )
    att = attainment_check(kw["x"], kw["S"], kw["space"], v)
    result = {
        "x_ab_compact": v.to_dict(),
        "attainment": att.to_dict(),
        "max_chebyshev": max_chebyshev_check(kw["x"], kw["S"], kw["space"], v),
    }
    traces = {"slab": v.trace.to_csv(), "t_deviation": v.t_verdict.trace.to_csv(), "diam_deviation": v.diam_verdict.trace.to_csv()}
    if kw["with_x_compact"]:
        xc = x_compact_verdict(kw["x"], kw["S"], kw["space"], kw["x_compact_horizon"], kw["tolerance"], kw["trend_window"])
        result["x_compact"] = xc.to_dict()
        result["x_compact"]["min_diam"] = float(xc.trace.diams.min())
        traces["x_compact_slab"] = xc.trace.to_csv()
    return result, traces


def _p_farthest(sc, path):
    S, space = _geometry(sc, path)
    probes = require(sc, "probes", path)
    if not isinstance(probes, list) or not probes:
        raise ConfigError(f"{path}.probes", "expected a non-empty list of points")
    return {
        "S": S,
        "space": space,
        "probes": [parse_point(p, f"{path}.probes[{i}]", S.dim) for i, p in enumerate(probes)],
        "eps_far": sc.get("eps_far"),
        "delta_unique": sc.get("delta_unique"),
    }


def _r_farthest(kw, seed):
    return remotality_scan(kw["S"], kw["space"], kw["probes"], kw["eps_far"], kw["delta_unique"]).to_dict(), {}


def _p_chebyshev(sc, path):
    S, space = _geometry(sc, path)
    return {"S": S, "space": space, "grid_resolution": int(number(sc, "grid_resolution", path, default=21, integer=True))}


def _r_chebyshev(kw, seed):
    c, r = chebyshev_center(kw["S"], kw["space"], kw["grid_resolution"])
    return {"center": c.tolist(), "radius": r}, {}


def _p_partial_compact(sc, path):
    S, space = _geometry(sc, path)
    H = parse_set(require(sc, "subset", path), f"{path}.subset")
    kw = {
        "x": parse_point(require(sc, "x", path), f"{path}.x", S.dim),
        "S": S,
        "space": space,
        "H": H,
        "horizon": _horizon(sc, path, default=200),
        "eps": number(sc, "eps", path, default=0.05, positive=True),
        **_common(sc, path),
    }
    kw["t_seq"] = parse_sequence(sc["t_sequence"], f"{path}.t_sequence") if "t_sequence" in sc else None
    kw["pair"] = parse_window(sc["window"], f"{path}.window") if "window" in sc else None
    return kw


def _r_partial_compact(kw, seed):
    res = partial_ab_compact_check(
        kw["x"], kw["S"], kw["space"], kw["H"], kw["t_seq"], kw["pair"], kw["horizon"], kw["eps"], kw["tolerance"], kw["trend_window"]
    )
    return res.to_dict(), {}


def _p_gauge(sc, path):
    S, space = _geometry(sc, path)
    kw = {
        "phi": parse_gauge(sc.get("gauge", {"gauge": "power", "p": 1.0}), f"{path}.gauge"),
        "x_seq": parse_sequence(require(sc, "probe", path), f"{path}.probe"),
        "x": parse_point(require(sc, "x", path), f"{path}.x", S.dim),
        "y": parse_point(require(sc, "y", path), f"{path}.y", S.dim),
        "S": S,
        "space": space,
        "pair": parse_window(require(sc, "window", path), f"{path}.window"),
        "horizon": _horizon(sc, path),
        **_common(sc, path),
    }
    return kw


def _p_gauge_div(sc, path):
    kw = _p_gauge(sc, path)
    grid = sc.get("bound_grid", list(DEFAULT_BOUND_GRID))
    if not isinstance(grid, list) or not grid:
        raise ConfigError(f"{path}.bound_grid", "expected a non-empty list of positive numbers")
    kw["grid"] = [float(m) for m in grid]
    return kw


def _r_gauge_div(kw, seed):
    rep = remotality_hypothesis_div(
        kw["phi"], kw["x_seq"], kw["x"], kw["y"], kw["S"], kw["space"], kw["pair"], kw["horizon"], kw["grid"],
        kw["tolerance"], kw["trend_window"],
    )
    return rep.to_dict(), {}


def _p_gauge_ratio(sc, path):
    kw = _p_gauge(sc, path)
    kw["eps"] = number(sc, "eps", path, positive=True)
    return kw


def _r_gauge_ratio(kw, seed):
    rep = remotality_hypothesis_ratio(
        kw["phi"], kw["x_seq"], kw["x"], kw["y"], kw["S"], kw["space"], kw["pair"], kw["eps"], kw["horizon"],
        kw["tolerance"], kw["trend_window"],
    )
    return rep.to_dict(), {}


def _p_battery(sc, path):
    name = require(sc, "battery", path)
    if name not in batteries.BATTERIES:
        raise ConfigError(f"{path}.battery", f"unknown battery {name!r}; known: {sorted(batteries.BATTERIES)}")
    kw = {"battery": name, "seed": int(number(sc, "seed", path, default=0, integer=True))}
    if "count" in sc:
        kw["count"] = number(sc, "count", path, integer=True, positive=True)
    return kw


def _r_battery(kw, seed):
    args = {"seed": kw["seed"] if seed is None else seed}
    if "count" in kw:
        args["count"] = kw["count"]
    rep = batteries.BATTERIES[kw["battery"]](**args)
    return rep.to_dict(), {}


OPERATIONS = {
    "validate_window_pair": (_p_validate, _r_validate),
    "density_trace": (_p_density, _r_density),
    "ab_stat_converges": (_p_converges, _r_converges),
    "ab_stat_diverges_to_inf": (_p_diverges, _r_diverges),
    "maximizing": (_p_maximizing, _r_maximizing),
    "partial_continuity": (_p_continuity, _r_continuity),
    "x_compact": (_p_x_compact, _r_x_compact),
    "x_ab_compact": (_p_x_ab_compact, _r_x_ab_compact),
    "farthest_points": (_p_farthest, _r_farthest),
    "chebyshev_center": (_p_chebyshev, _r_chebyshev),
    "partial_compact": (_p_partial_compact, _r_partial_compact),
    "gauge_div": (_p_gauge_div, _r_gauge_div),
    "gauge_ratio": (_p_gauge_ratio, _r_gauge_ratio),
    "battery": (_p_battery, _r_battery),
}


# ---------------------------------------------------------------------------
# built-in scenarios

_SQ = {"family": "poly_window", "a": 1, "b_exp": 2}

BUILTIN = {
    "paper:example-sign-continuity": (
        "sign function on [-1,1] is partially (alpha beta)-statistically continuous at 0 (windows [1,n^2], c=1/2)",
        {
            "operation": "partial_continuity",
            "function": "sign",
            "x": 0.0,
            "probe": {"family": "dyadic_sign_probe", "c": 0.5},
            "window": _SQ,
            "eps": 0.5,
            "horizon": 200,
            "expect": {"preimage.status": "ConvergesToZero", "image.status": "ConvergesToZero", "continuous": True},
        },
    ),
    "paper:example-divergence": (
        "0 at powers of two else n diverges to infinity under windows [n^3, n^3+n^2]",
        {
            "operation": "ab_stat_diverges_to_inf",
            "sequence": "dyadic_zero_index",
            "window": {"family": "shifted_poly", "p": 3, "q": 2},
            "bound_grid": [1, 10, 100],
            "horizon": 60,
            "expect": {
                "aggregate": "ConvergesToZero",
                "per_bound.0.status": "ConvergesToZero",
                "per_bound.1.status": "ConvergesToZero",
                "per_bound.2.status": "ConvergesToZero",
            },
        },
    ),
    "paper:example-maximizing": (
        "mixed sequence in [-1,1] is not maximizing but is (alpha beta)-maximizing at x=0 (windows [1,n^2])",
        {
            "operation": "maximizing",
            "sequence": {"family": "dyadic_dropout", "c": 0.5},
            "x": 0.0,
            "set": {"interval": [-1, 1]},
            "eps": 0.5,
            "window": _SQ,
            "horizon": 200,
            "maximizing_horizon": 500,
            "expect": {"delta": 1.0, "maximizing.maximizing": False, "ab_stat_maximizing.status": "ConvergesToZero"},
        },
    ),
    "paper:example-compactness": (
        "[-1,1] is not 0-compact but is 0-(alpha beta)-compact with t_n = 1 on squares else 0",
        {
            "operation": "x_ab_compact",
            "x": 0.0,
            "set": {"interval": [-1, 1]},
            "t_sequence": "square_indicator",
            "window": _SQ,
            "eps": 0.5,
            "horizon": 10000,
            "with_x_compact": True,
            "x_compact_horizon": 10000,
            "expect": {
                "x_ab_compact.t_verdict.status": "ConvergesToZero",
                "x_ab_compact.diam_verdict.status": "ConvergesToZero",
                "x_compact.diam_verdict.status": "DoesNotConverge",
                "x_compact.min_diam": 2.0,
            },
        },
    ),
    "paper:theorem-z1-battery": (
        "x-compact implies x-(alpha beta)-compact with t_n = 1/n on 50 instances x 3 window pairs",
        {"operation": "battery", "battery": "z1", "seed": 0, "expect": {"passed": True}},
    ),
    "paper:theorem-maximizing-battery": (
        "maximizing implies (alpha beta)-maximizing on 50 instances x 3 window pairs",
        {"operation": "battery", "battery": "maximizing", "seed": 0, "expect": {"passed": True}},
    ),
    "paper:theorem-partial-compact-battery": (
        "partial x-(alpha beta)-compactness iff attainment, both directions on 50 instances",
        {"operation": "battery", "battery": "partial_compact", "seed": 0, "expect": {"passed": True}},
    ),
    "paper:theorem-max-chebyshev-battery": (
        "x-(alpha beta)-compact implies unique farthest point; degenerate square witness reported",
        {"operation": "battery", "battery": "max_chebyshev", "seed": 0, "expect": {"passed": True}},
    ),
    "paper:gauge-soundness-battery": (
        "divergence gauge criterion soundness on 100 instances; ratio sign example reported as violated",
        {"operation": "battery", "battery": "gauge", "seed": 0, "expect": {"passed": True}},
    ),
}


def list_scenarios():
    return [(name, desc) for name, (desc, _) in BUILTIN.items()]


def builtin_scenario(name):
    if name not in BUILTIN:
        raise ConfigError("scenario", f"unknown built-in scenario {name!r}; see `remotal-lab list`")
    return {"name": name, **BUILTIN[name][1]}


def resolve_target(target):
    """Scenario dicts for a built-in name (``paper:...``, or ``paper:all``) or a config path."""
    if target == "paper:all":
        return [builtin_scenario(n) for n in BUILTIN]
    if target in BUILTIN:
        return [builtin_scenario(target)]
    if not os.path.exists(target):
        raise ConfigError("config", f"no such file or built-in scenario: {target}")
    return load_scenarios(target)


def prepare(sc, path):
    name = require(sc, "name", path)
    if not isinstance(name, str) or not name:
        raise ConfigError(f"{path}.name", "expected a non-empty string")
    op = require(sc, "operation", path)
    if op not in OPERATIONS:
        raise ConfigError(f"{path}.operation", f"unknown operation {op!r}; known: {sorted(OPERATIONS)}")
    expect = sc.get("expect", {})
    if not isinstance(expect, dict):
        raise ConfigError(f"{path}.expect", "expected an object")
    return OPERATIONS[op][0](sc, path)


def validate(scenarios, base="config.scenarios"):
    names = set()
    for i, sc in enumerate(scenarios):
        prepare(sc, f"{base}[{i}]")
        if sc["name"] in names:
            raise ConfigError(f"{base}[{i}].name", f"duplicate scenario name {sc['name']!r}")
        names.add(sc["name"])


def slug(name):
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name).strip("_") or "scenario"


def _lookup(obj, dotted):
    for part in dotted.split("."):
        if isinstance(obj, list) and part.isdigit() and int(part) < len(obj):
            obj = obj[int(part)]
        elif isinstance(obj, dict) and part in obj:
            obj = obj[part]
        else:
            raise KeyError(dotted)
    return obj


@dataclass
class Outcome:
    name: str
    passed: bool
    report_path: str
    failures: list


def run_scenario(sc, out_dir, seed=None, path="scenario"):
    kw = prepare(sc, path)
    op = sc["operation"]
    result, traces = OPERATIONS[op][1](kw, seed)
    result = to_jsonable(result)
    base = slug(sc["name"])
    os.makedirs(out_dir, exist_ok=True)
    trace_files = {}
    for tname, text in traces.items():
        fname = f"{base}__{tname}.csv"
        with open(os.path.join(out_dir, fname), "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        trace_files[tname] = fname

    failures = []
    for key, want in sc.get("expect", {}).items():
        try:
            got = _lookup(result, key)
        except KeyError:
            failures.append({"key": key, "expected": want, "got": None, "error": "missing"})
            continue
        if got != want:
            failures.append({"key": key, "expected": want, "got": got})
    passed = not failures
    if op == "battery" and not result.get("passed", False):
        passed = False
    report = {
        "name": sc["name"],
        "operation": op,
        "passed": passed,
        "expect_failures": failures,
        "result": result,
        "traces": trace_files,
    }
    report_path = os.path.join(out_dir, f"{base}.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(dump_json(report))
    return Outcome(sc["name"], passed, report_path, failures)


def _run_one(args):
    sc, out_dir, seed, path = args
    return run_scenario(sc, out_dir, seed, path)


def run_all(scenarios, out_dir, jobs=1, seed=None):
    """Run scenarios (in order, or across ``jobs`` processes) and return outcomes in input order."""
    validate(scenarios)
    tasks = [(sc, out_dir, seed, f"config.scenarios[{i}]") for i, sc in enumerate(scenarios)]
    if jobs <= 1 or len(tasks) <= 1:
        return [_run_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, tasks))
