"""Sequence families and finite-horizon classifiers built on window densities."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidInput, InvalidWitness
from .geometry import BoundedSet, NormedSpace, as_point, farthest_distance
from .windows import (
    DEFAULT_TOLERANCE,
    IndexPredicate,
    Status,
    Verdict,
    WindowPair,
    always,
    default_trend_window,
    density_trace,
    enumeration_cap,
    perfect_squares,
    powers_of_two,
    verdict_converges_to_zero,
    window_table,
)

DEFAULT_BOUND_GRID = (1.0, 10.0, 100.0, 1000.0)
DEFAULT_C = 0.5


@dataclass(frozen=True)
class LabSequence:
    """A real (or R^d-valued) sequence indexed from 1.

    ``fn`` is vectorised over an int64 index array. ``level_sets`` optionally
    certifies a finite-valued sequence: pairs ``(value, predicate)`` whose
    predicates partition the positive integers and carry closed-form counts.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    label: str = ""
    params: dict = field(default_factory=dict)
    level_sets: Optional[tuple] = None
    length: Optional[int] = None

    def values(self, ks) -> np.ndarray:
        ks = np.asarray(ks, dtype=np.int64)
        if ks.size and ks.min() < 1:
            raise InvalidInput("sequences are indexed from 1")
        if self.length is not None and ks.size and ks.max() > self.length:
            raise InvalidInput(f"sequence {self.label!r} is tabulated only up to n={self.length}, asked for n={int(ks.max())}")
        out = np.asarray(self.fn(ks), dtype=float)
        if not np.all(np.isfinite(out)):
            bad = int(ks.ravel()[np.nonzero(~np.all(np.isfinite(out.reshape(ks.size, -1)), axis=1))[0][0]])
            raise InvalidInput(f"sequence {self.label!r} has a non-finite term at n={bad}")
        return out

    def term(self, n: int):
        v = self.values(np.array([n]))[0]
        return float(v) if np.ndim(v) == 0 else v

    def tabulated(self, upto: int) -> "LabSequence":
        """Same sequence backed by a precomputed table of ``x_1..x_upto``."""
        table_ = self.values(np.arange(1, upto + 1))
        table_.setflags(write=False)
        return LabSequence(lambda ks: table_[ks - 1], self.label, dict(self.params), self.level_sets, upto)

    def map(self, f: Callable[[np.ndarray], np.ndarray], label: Optional[str] = None) -> "LabSequence":
        """Compose a vectorised ``f`` after the sequence; level-set certificates carry over."""
        levels = None
        if self.level_sets is not None:
            levels = tuple((float(np.asarray(f(np.array([v])), dtype=float).ravel()[0]), p) for v, p in self.level_sets)
        return LabSequence(
            lambda ks: f(self.values(ks)),
            label or f"f({self.label})",
            dict(self.params),
            levels,
            self.length,
        )


def deviation_predicate(seq: LabSequence, test: Callable[[np.ndarray], np.ndarray], label: str = "") -> IndexPredicate:
    """``k -> test(x_k)``, certified when the sequence has level sets."""
    count = None
    if seq.level_sets is not None:
        hits = [p for v, p in seq.level_sets if bool(np.asarray(test(np.array([v]))).ravel()[0])]
        if all(p.count is not None for p in hits):

            def count(lo, hi):
                return sum(int(p.count(lo, hi)) for p in hits)

    return IndexPredicate(lambda ks: np.asarray(test(seq.values(ks)), dtype=bool), count, label)


# ---------------------------------------------------------------------------
# families


def constant(value: float) -> LabSequence:
    return LabSequence(
        lambda ks: np.full(np.shape(ks), float(value)),
        f"constant({value:g})",
        {"value": value},
        ((float(value), always()),),
    )


def _pow2(ks):
    return powers_of_two().mask(ks)


def _check_c(c):
    if not 0 < c < 1:
        raise InvalidInput(f"c must lie in (0, 1), got {c}")


def dyadic_sign_probe(c: float = DEFAULT_C) -> LabSequence:
    """``-1 + c**n`` at ``n = 2**m`` (m >= 1), else 0."""
    _check_c(c)
    return LabSequence(
        lambda ks: np.where(_pow2(ks), -1.0 + np.power(c, ks.astype(float)), 0.0),
        "dyadic_sign_probe",
        {"c": c},
    )


def dyadic_dropout(c: float = DEFAULT_C) -> LabSequence:
    """0 at ``n = 2**m`` (m >= 1), else ``1 - c**n``."""
    _check_c(c)
    return LabSequence(
        lambda ks: np.where(_pow2(ks), 0.0, 1.0 - np.power(c, ks.astype(float))),
        "dyadic_dropout",
        {"c": c},
    )


def dyadic_zero_index() -> LabSequence:
    """0 at ``n = 2**k`` (k >= 1), else ``n``."""
    return LabSequence(lambda ks: np.where(_pow2(ks), 0.0, ks.astype(float)), "dyadic_zero_index", {})


def harmonic(scale: float = 1.0) -> LabSequence:
    return LabSequence(lambda ks: scale / ks.astype(float), "harmonic", {"scale": scale})


def one_minus_harmonic() -> LabSequence:
    return LabSequence(lambda ks: 1.0 - 1.0 / ks.astype(float), "one_minus_harmonic", {})


def _odd_mask(ks):
    return (np.asarray(ks) % 2) == 1


def _odd_count(lo, hi):
    lo = max(lo, 1)
    return 0 if hi < lo else (hi + 1) // 2 - lo // 2


def alternating() -> LabSequence:
    """``(-1)**n``."""
    odd = IndexPredicate(_odd_mask, _odd_count, "odd")
    return LabSequence(
        lambda ks: np.where(_odd_mask(ks), -1.0, 1.0), "alternating", {}, ((-1.0, odd), (1.0, odd.negate()))
    )


def index_sequence() -> LabSequence:
    return LabSequence(lambda ks: ks.astype(float), "index", {})


def square_indicator(on: float = 1.0, off: float = 0.0) -> LabSequence:
    """``on`` at perfect squares, ``off`` elsewhere (certified)."""
    sq = perfect_squares()
    return LabSequence(
        lambda ks: np.where(sq.mask(ks), on, off),
        "square_indicator",
        {"on": on, "off": off},
        ((float(on), sq), (float(off), sq.negate())),
    )


def convergent_probe(x, direction, power: float = 1.0) -> LabSequence:
    """``x + direction / n**power`` in R^d (scalar when ``x`` is scalar)."""
    x0 = np.asarray(x, dtype=float)
    v = np.asarray(direction, dtype=float)

    def fn(ks):
        s = 1.0 / ks.astype(float) ** power
        if x0.ndim == 0:
            return x0 + v * s
        return x0[None, :] + s[:, None] * v[None, :]

    return LabSequence(fn, "convergent_probe", {"x": x0.tolist(), "direction": v.tolist(), "power": power})


def table(values: Sequence[float]) -> LabSequence:
    arr = np.asarray(values, dtype=float)
    return LabSequence(lambda ks: arr[ks - 1], "table", {"n": len(arr)}, None, len(arr))


# ---------------------------------------------------------------------------
# classifiers


def ab_stat_converges(
    seq: LabSequence,
    limit: float,
    eps: float,
    pair: WindowPair,
    horizon: int,
    tolerance: float = DEFAULT_TOLERANCE,
    trend_window: Optional[int] = None,
    cap: Optional[int] = None,
) -> Verdict:
    """Verdict on the window densities of ``{k : |x_k - limit| >= eps}``."""
    if not eps > 0:
        raise InvalidInput(f"eps must be > 0, got {eps}")
    pred = deviation_predicate(seq, lambda v: np.abs(v - limit) >= eps, f"|{seq.label} - {limit:g}| >= {eps:g}")
    trace = density_trace(pred, pair, horizon, cap=cap)
    return verdict_converges_to_zero(trace, tolerance, trend_window)


@dataclass(frozen=True)
class DivergenceReport:
    per_bound: tuple  # ((M, Verdict), ...)
    aggregate: Status
    margin: float

    @property
    def diverges(self) -> bool:
        return self.aggregate is Status.CONVERGES_TO_ZERO

    def to_dict(self):
        return {
            "aggregate": self.aggregate.value,
            "margin": self.margin,
            "per_bound": [{"M": m, **v.to_dict()} for m, v in self.per_bound],
        }


def _aggregate(statuses):
    statuses = list(statuses)
    if all(s is Status.CONVERGES_TO_ZERO for s in statuses):
        return Status.CONVERGES_TO_ZERO
    if any(s is Status.DOES_NOT_CONVERGE for s in statuses):
        return Status.DOES_NOT_CONVERGE
    return Status.INCONCLUSIVE


def ab_stat_diverges_to_inf(
    seq: LabSequence,
    pair: WindowPair,
    horizon: int,
    bound_grid: Sequence[float] = DEFAULT_BOUND_GRID,
    tolerance: float = DEFAULT_TOLERANCE,
    trend_window: Optional[int] = None,
    cap: Optional[int] = None,
) -> DivergenceReport:
    """For each ``M`` in the grid, the density verdict on ``{k : x_k < M}``.

    ``margin`` is the minimum of ``x_n`` over the last ``trend_window``
    indices ``n <= horizon``.
    """
    grid = [float(m) for m in bound_grid]
    if not grid:
        raise InvalidInput("bound_grid must be non-empty")
    if any(m <= 0 for m in grid):
        raise InvalidInput(f"every bound M must be > 0, got {grid}")
    if seq.level_sets is None:
        top = int(window_table(pair, horizon)[3].max())
        if top <= (enumeration_cap() if cap is None else cap):
            seq = seq.tabulated(max(top, horizon))
    per = []
    for m in grid:
        pred = deviation_predicate(seq, lambda v, m=m: v < m, f"{seq.label} < {m:g}")
        trace = density_trace(pred, pair, horizon, cap=cap)
        per.append((m, verdict_converges_to_zero(trace, tolerance, trend_window)))
    w = trend_window or default_trend_window(horizon)
    margin = float(seq.values(np.arange(horizon - w + 1, horizon + 1)).min())
    return DivergenceReport(tuple(per), _aggregate(v.status for _, v in per), margin)


def _distance_sequence(seq: LabSequence, x, space: NormedSpace) -> LabSequence:
    x = as_point(x, space.dim)

    def fn(ks):
        vals = seq.values(ks)
        return space.norms(np.asarray(vals, dtype=float).reshape(len(ks), space.dim) - x)

    return LabSequence(fn, f"||{seq.label} - x||", dict(seq.params), None, seq.length)


@dataclass(frozen=True)
class MaximizingResult:
    maximizing: bool
    delta: float
    first_violation_in_tail: Optional[int]
    last_violation: Optional[int]
    horizon: int
    trend_window: int

    def to_dict(self):
        return {
            "maximizing": self.maximizing,
            "delta": self.delta,
            "first_violation_in_tail": self.first_violation_in_tail,
            "last_violation": self.last_violation,
            "horizon": self.horizon,
            "trend_window": self.trend_window,
        }


def is_maximizing(
    seq: LabSequence,
    x,
    S: BoundedSet,
    space: NormedSpace,
    eps: float,
    horizon: int,
    trend_window: Optional[int] = None,
) -> MaximizingResult:
    """Ordinary convergence of ``||x_n - x||`` to ``delta(x, S)``, checked on a tail.

    The default tail is the last half of ``1..horizon``: one full dyadic block,
    so sparse exceptions at powers of two are always sampled.
    """
    if not eps > 0:
        raise InvalidInput(f"eps must be > 0, got {eps}")
    delta = farthest_distance(x, S, space)
    w = trend_window or max(1, horizon // 2)
    ks = np.arange(1, horizon + 1)
    dev = np.abs(_distance_sequence(seq, x, space).values(ks) - delta)
    viol = np.nonzero(dev >= eps)[0] + 1
    tail_viol = viol[viol > horizon - w]
    return MaximizingResult(
        maximizing=tail_viol.size == 0,
        delta=delta,
        first_violation_in_tail=int(tail_viol[0]) if tail_viol.size else None,
        last_violation=int(viol[-1]) if viol.size else None,
        horizon=horizon,
        trend_window=w,
    )


def is_ab_stat_maximizing(
    seq: LabSequence,
    x,
    S: BoundedSet,
    space: NormedSpace,
    eps: float,
    pair: WindowPair,
    horizon: int,
    tolerance: float = DEFAULT_TOLERANCE,
    trend_window: Optional[int] = None,
    cap: Optional[int] = None,
) -> Verdict:
    delta = farthest_distance(x, S, space)
    return ab_stat_converges(_distance_sequence(seq, x, space), delta, eps, pair, horizon, tolerance, trend_window, cap)


# ---------------------------------------------------------------------------
# partial continuity


@dataclass(frozen=True)
class ContinuityWitness:
    probe: LabSequence
    x: float
    preimage: Verdict
    image: Verdict

    @property
    def continuous(self) -> bool:
        """Implication reading: preimage convergence forces image convergence."""
        return (not self.preimage.converges) or self.image.converges

    @property
    def both_converge(self) -> bool:
        return self.preimage.converges and self.image.converges

    def to_dict(self):
        return {
            "probe": self.probe.label,
            "probe_params": self.probe.params,
            "x": self.x,
            "preimage": self.preimage.to_dict(),
            "image": self.image.to_dict(),
            "continuous": self.continuous,
            "both_converge": self.both_converge,
        }


def check_not_eventually_constant(probe: LabSequence, last_index: int, blocks: int = 3) -> None:
    """Require the probe to move inside each of the last ``blocks`` dyadic blocks.

    Block ``j`` is ``(K / 2**(j+1), K / 2**j]`` with ``K = last_index``; in each
    one some term must differ from ``x_K``.
    """
    if last_index < 2**blocks:
        raise InvalidWitness(f"need at least {2 ** blocks} checked indices, got {last_index}")
    vals = probe.values(np.arange(1, last_index + 1))
    final = vals[-1]
    differs = np.abs(vals - final) > 0 if vals.ndim == 1 else np.any(vals != final, axis=1)
    for j in range(blocks):
        hi = last_index // 2**j
        lo = last_index // 2 ** (j + 1)
        if not differs[lo:hi].any():
            raise InvalidWitness(
                f"probe {probe.label!r} is constant on ({lo}, {hi}]; it looks eventually constant"
            )


def partial_ab_stat_continuity(
    f: Callable[[np.ndarray], np.ndarray],
    x: float,
    probe: LabSequence,
    pair: WindowPair,
    eps: float,
    horizon: int,
    tolerance: float = DEFAULT_TOLERANCE,
    trend_window: Optional[int] = None,
    cap: Optional[int] = None,
    blocks: int = 3,
) -> ContinuityWitness:
    """Evaluate one witness: does ``x_n -> x`` carry over to ``f(x_n) -> f(x)``?"""
    lo, hi = pair.integer_range(horizon)
    cap_ = enumeration_cap() if cap is None else cap
    check_not_eventually_constant(probe, min(hi, cap_), blocks)
    pre = ab_stat_converges(probe, x, eps, pair, horizon, tolerance, trend_window, cap)
    fx = float(np.asarray(f(np.array([float(x)]))).ravel()[0])
    img = ab_stat_converges(probe.map(f), fx, eps, pair, horizon, tolerance, trend_window, cap)
    return ContinuityWitness(probe, float(x), pre, img)


def sign_function(v):
    """-1 / 0 / 1 on the reals."""
    return np.sign(np.asarray(v, dtype=float))


def identity_function(v):
    return np.asarray(v, dtype=float)
