"""JSON scenario configs: family registries and key-path-aware parsing.

Every parse function takes the JSON fragment plus its key path (for example
``scenarios[2].window``) so a malformed config names the failing key.
"""

from __future__ import annotations

import json
import math

import numpy as np

from . import seqlab, windows
from .errors import ConfigError, LabError
from .gauge import power_gauge
from .geometry import BoundedSet, NormedSpace

WINDOW_FAMILIES = {
    "classical": (windows.classical_pair, ()),
    "poly_window": (windows.poly_window, ("a", "a_exp", "b", "b_exp")),
    "shifted_poly": (windows.shifted_poly, ("p", "q")),
    "linear_window": (windows.linear_window, ("lo_mult", "hi_mult")),
}

PREDICATE_FAMILIES = {
    "powers_of_two": windows.powers_of_two,
    "perfect_squares": windows.perfect_squares,
    "always": windows.always,
    "never": windows.never,
}

SEQUENCE_FAMILIES = {
    "constant": (seqlab.constant, ("value",)),
    "dyadic_sign_probe": (seqlab.dyadic_sign_probe, ("c",)),
    "dyadic_dropout": (seqlab.dyadic_dropout, ("c",)),
    "dyadic_zero_index": (seqlab.dyadic_zero_index, ()),
    "harmonic": (seqlab.harmonic, ("scale",)),
    "one_minus_harmonic": (seqlab.one_minus_harmonic, ()),
    "alternating": (seqlab.alternating, ()),
    "index": (seqlab.index_sequence, ()),
    "square_indicator": (seqlab.square_indicator, ("on", "off")),
    "convergent_probe": (seqlab.convergent_probe, ("x", "direction", "power")),
    "table": (seqlab.table, ("values",)),
}

FUNCTIONS = {
    "sign": seqlab.sign_function,
    "identity": seqlab.identity_function,
}


def require(obj, key, path):
    if not isinstance(obj, dict):
        raise ConfigError(path, f"expected an object, got {type(obj).__name__}")
    if key not in obj:
        raise ConfigError(f"{path}.{key}", "missing required key")
    return obj[key]


def number(obj, key, path, default=None, positive=False, integer=False):
    if not isinstance(obj, dict):
        raise ConfigError(path, f"expected an object, got {type(obj).__name__}")
    if key not in obj:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing required key")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{path}.{key}", f"must be > 0, got {v!r}")
    return int(v) if integer else float(v)


def optional_int(obj, key, path):
    if obj.get(key) is None:
        return None
    return number(obj, key, path, integer=True, positive=True)


def _family(obj, path, registry, kind):
    if isinstance(obj, str):
        obj = {"family": obj}
    name = require(obj, "family", path)
    if name not in registry:
        raise ConfigError(f"{path}.family", f"unknown {kind} family {name!r}; known: {sorted(registry)}")
    return name, obj


def _call(factory, allowed, obj, path):
    kwargs = {}
    for key, value in obj.items():
        if key == "family":
            continue
        if key not in allowed:
            raise ConfigError(f"{path}.{key}", f"unexpected parameter; allowed: {list(allowed)}")
        kwargs[key] = value
    try:
        return factory(**kwargs)
    except (LabError, TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from None


def parse_window(obj, path):
    name, obj = _family(obj, path, WINDOW_FAMILIES, "window")
    factory, allowed = WINDOW_FAMILIES[name]
    return _call(factory, allowed, obj, path)


def parse_predicate(obj, path):
    name, obj = _family(obj, path, PREDICATE_FAMILIES, "predicate")
    return _call(PREDICATE_FAMILIES[name], (), obj, path)


def parse_sequence(obj, path):
    name, obj = _family(obj, path, SEQUENCE_FAMILIES, "sequence")
    factory, allowed = SEQUENCE_FAMILIES[name]
    return _call(factory, allowed, obj, path)


def parse_function(obj, path):
    if obj not in FUNCTIONS:
        raise ConfigError(path, f"unknown function {obj!r}; known: {sorted(FUNCTIONS)}")
    return FUNCTIONS[obj]


def parse_set(obj, path):
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected {'cloud': [...]}, {'box': {...}} or {'interval': [a, b]}")
    try:
        if "cloud" in obj:
            pts = obj["cloud"]
            if not isinstance(pts, list) or not pts:
                raise ConfigError(f"{path}.cloud", "expected a non-empty list of points")
            return BoundedSet.cloud([p if isinstance(p, list) else [p] for p in pts])
        if "box" in obj:
            box = obj["box"]
            return BoundedSet.box(require(box, "lo", f"{path}.box"), require(box, "hi", f"{path}.box"))
        if "interval" in obj:
            iv = obj["interval"]
            if not (isinstance(iv, list) and len(iv) == 2):
                raise ConfigError(f"{path}.interval", "expected [a, b]")
            return BoundedSet.interval(float(iv[0]), float(iv[1]))
    except ConfigError:
        raise
    except (LabError, TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from None
    raise ConfigError(path, "expected one of the keys 'cloud', 'box', 'interval'")


def parse_space(obj, path, dim):
    obj = obj or {}
    p = obj.get("p", 2.0)
    if isinstance(p, str) and p.lower() in ("inf", "infinity"):
        p = math.inf
    try:
        return NormedSpace(int(obj.get("dim", dim)), p)
    except (LabError, TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from None


def parse_point(obj, path, dim):
    arr = np.atleast_1d(np.asarray(obj, dtype=float)) if isinstance(obj, (int, float, list)) else None
    if arr is None or arr.size != dim:
        raise ConfigError(path, f"expected a point of dimension {dim}, got {obj!r}")
    return arr


def parse_gauge(obj, path):
    if not isinstance(obj, dict) or obj.get("gauge") != "power":
        raise ConfigError(path, "expected {'gauge': 'power', 'p': <number >= 1>}")
    try:
        return power_gauge(number(obj, "p", path, default=1.0))
    except LabError as exc:
        raise ConfigError(f"{path}.p", str(exc)) from None


def load_scenarios(source, path="config"):
    """Return the list of scenario dicts in a config (a file path or an already-parsed object)."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        try:
            with open(source, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(path, f"invalid JSON: {exc}") from None
    else:
        data = source
    if isinstance(data, dict) and "scenarios" in data:
        items = data["scenarios"]
        base = f"{path}.scenarios"
    elif isinstance(data, list):
        items, base = data, path
    elif isinstance(data, dict):
        return [data]
    else:
        raise ConfigError(path, "expected an object or a list of scenarios")
    if not isinstance(items, list) or not items:
        raise ConfigError(base, "expected a non-empty list of scenarios")
    for i, item in enumerate(items):
        if not isinstance(item, dict):
            raise ConfigError(f"{base}[{i}]", "scenario must be an object")
    return items
