"""Gauge functions and hypothesis checkers for the gauge-based remotality criteria.

A gauge is strictly increasing and continuous on ``[0, inf)`` with
``phi(0) = 0``. Both checkers work at one point ``x`` with one convergent
probe ``x_n -> x`` and one candidate ``y``. They test the hypothesis against
every other extreme candidate ``z`` of ``E``, then compare it with the
conclusion ``||x - y|| >= ||x - z||`` for all ``z``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, InvalidInput
from .geometry import BoundedSet, NormedSpace, as_point, default_eps_far, farthest_distance
from .seqlab import DEFAULT_BOUND_GRID, LabSequence, ab_stat_diverges_to_inf
from .windows import (
    DEFAULT_TOLERANCE,
    IndexPredicate,
    WindowPair,
    default_trend_window,
    density_trace,
    enumeration_cap,
    verdict_converges_to_zero,
    window_table,
)

DENOMINATOR_GUARD = 1e-12


@dataclass(frozen=True)
class GaugeCheck:
    phi_zero: bool
    strictly_increasing: bool
    continuous: bool

    @property
    def ok(self) -> bool:
        return self.phi_zero and self.strictly_increasing and self.continuous


@dataclass(frozen=True)
class GaugeFunction:
    fn: Callable[[np.ndarray], np.ndarray]
    label: str = ""
    params: dict = None

    def __call__(self, t):
        return self.fn(np.asarray(t, dtype=float))

    def check(self, scale: float = 1.0, points: int = 1000) -> GaugeCheck:
        """Finite checks on ``[0, 10 * scale]``.

        Continuity proxy: each tenfold grid refinement must at least halve the
        largest step between neighbouring values; a jump keeps it flat.
        """
        zero = float(self(np.array([0.0]))[0]) == 0.0
        steps = []
        increasing = True
        for m in (points, 10 * points, 100 * points):
            diffs = np.diff(self(np.linspace(0.0, 10.0 * scale, m)))
            increasing &= bool(np.all(diffs > 0))
            steps.append(float(np.max(np.abs(diffs))))
        continuous = all(b <= 0.5 * a for a, b in zip(steps, steps[1:]))
        return GaugeCheck(zero, increasing, continuous)


def power_gauge(p: float) -> GaugeFunction:
    """``t -> t**p`` for ``p >= 1``."""
    p = float(p)
    if not p >= 1:
        raise DomainError(f"power gauge needs p >= 1, got {p}")
    return GaugeFunction(lambda t: np.power(t, p), f"t^{p:g}", {"p": p})


@dataclass(frozen=True)
class GaugeReport:
    precondition_ok: bool
    precondition_note: str
    per_z: tuple  # ((z, DivergenceReport | Verdict), ...)
    hypothesis_holds: bool
    conclusion_holds: bool
    margin: Optional[float] = None
    guarded: tuple = ()

    @property
    def conclusion_violated(self) -> bool:
        return self.precondition_ok and self.hypothesis_holds and not self.conclusion_holds

    def to_dict(self):
        return {
            "precondition_ok": self.precondition_ok,
            "precondition_note": self.precondition_note,
            "hypothesis_holds": self.hypothesis_holds,
            "conclusion_holds": self.conclusion_holds,
            "conclusion_violated": self.conclusion_violated,
            "margin": self.margin,
            "per_z": {str(i): {"z": list(z), "result": r.to_dict()} for i, (z, r) in enumerate(self.per_z)},
            "guarded": list(self.guarded),
        }


def _probe_converges(x_seq, x, space, horizon, trend_window, conv_tol):
    w = trend_window or default_trend_window(horizon)
    ks = np.arange(horizon - w + 1, horizon + 1)
    vals = np.asarray(x_seq.values(ks), dtype=float).reshape(len(ks), space.dim)
    gap = float(space.norms(vals - x).max())
    if gap < conv_tol:
        return True, f"max ||x_n - x|| over last {w} indices = {gap!r}"
    return False, f"probe does not converge to x: max ||x_n - x|| over last {w} indices = {gap!r} >= {conv_tol!r}"


def _setup(x, y, E, space, eps_far):
    x = as_point(x, space.dim)
    y = as_point(y, space.dim)
    if not E.contains(y, 1e-12):
        raise InvalidInput(f"y={y.tolist()} is not a point of E")
    zs = [z for z in np.unique(np.asarray(E.candidates()), axis=0) if not np.array_equal(z, y)]
    delta = farthest_distance(x, E, space)
    tol = default_eps_far(delta) if eps_far is None else eps_far
    conclusion = space.dist(x, y) >= delta - tol
    return x, y, zs, conclusion


def _tabulate(x_seq, pair, horizon, cap):
    top = max(int(window_table(pair, horizon)[3].max()), horizon)
    if top <= (enumeration_cap() if cap is None else cap):
        return x_seq.tabulated(top)
    return x_seq


def _dist_fn(x_seq, space, point):
    def fn(ks):
        vals = np.asarray(x_seq.values(ks), dtype=float).reshape(len(ks), space.dim)
        return space.norms(vals - point)

    return fn


def remotality_hypothesis_div(
    phi: GaugeFunction,
    x_seq: LabSequence,
    x,
    y,
    E: BoundedSet,
    space: NormedSpace,
    pair: WindowPair,
    horizon: int,
    bound_grid: Sequence[float] = DEFAULT_BOUND_GRID,
    tolerance: float = DEFAULT_TOLERANCE,
    trend_window: Optional[int] = None,
    conv_tol: float = 1e-2,
    eps_far: Optional[float] = None,
    cap: Optional[int] = None,
) -> GaugeReport:
    """Divergence criterion: ``phi(||x_n - y||) - phi(||x_n - z||)`` diverges for every ``z != y``.

    ``z = y`` is skipped since it gives the zero sequence. The hypothesis is
    judged on the finite ``bound_grid``. ``margin`` is the smallest tail value
    of the difference sequences.
    """
    x, y, zs, conclusion = _setup(x, y, E, space, eps_far)
    ok, note = _probe_converges(x_seq, x, space, horizon, trend_window, conv_tol)
    if not ok:
        return GaugeReport(False, note, (), False, conclusion)
    x_seq = _tabulate(x_seq, pair, horizon, cap)
    dy = _dist_fn(x_seq, space, y)
    per = []
    for z in zs:
        dz = _dist_fn(x_seq, space, z)
        diff = LabSequence(lambda ks, dz=dz: phi(dy(ks)) - phi(dz(ks)), f"phi-diff z={z.tolist()}")
        per.append((tuple(z.tolist()), ab_stat_diverges_to_inf(diff, pair, horizon, bound_grid, tolerance, trend_window, cap)))
    holds = all(r.diverges for _, r in per)
    margin = min((r.margin for _, r in per), default=None)
    return GaugeReport(True, note, tuple(per), holds, conclusion, margin)


def remotality_hypothesis_ratio(
    phi: GaugeFunction,
    x_seq: LabSequence,
    x,
    y,
    E: BoundedSet,
    space: NormedSpace,
    pair: WindowPair,
    eps: float,
    horizon: int,
    tolerance: float = DEFAULT_TOLERANCE,
    trend_window: Optional[int] = None,
    conv_tol: float = 1e-2,
    eps_far: Optional[float] = None,
    cap: Optional[int] = None,
) -> GaugeReport:
    """Ratio criterion: ``phi(||x_n - x||) / (phi(||x_n - y||) - phi(||x_n - z||)) -> 0``.

    The absolute value of the ratio is tested against ``eps``. Indices whose
    denominator is within ``1e-12`` of zero count as deviations. Their totals
    over ``1..horizon`` are reported in ``guarded``.
    """
    if not eps > 0:
        raise InvalidInput(f"eps must be > 0, got {eps}")
    x, y, zs, conclusion = _setup(x, y, E, space, eps_far)
    ok, note = _probe_converges(x_seq, x, space, horizon, trend_window, conv_tol)
    if not ok:
        return GaugeReport(False, note, (), False, conclusion)
    x_seq = _tabulate(x_seq, pair, horizon, cap)
    dx = _dist_fn(x_seq, space, x)
    dy = _dist_fn(x_seq, space, y)
    per = []
    guarded = []
    for z in zs:
        dz = _dist_fn(x_seq, space, z)

        def parts(ks, dz=dz):
            num = phi(dx(ks))
            den = phi(dy(ks)) - phi(dz(ks))
            return num, den

        def mask(ks, parts=parts):
            num, den = parts(ks)
            small = np.abs(den) < DENOMINATOR_GUARD
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.abs(num / np.where(small, 1.0, den))
            return small | (ratio >= eps)

        pred = IndexPredicate(mask, None, f"|ratio| >= {eps:g}, z={z.tolist()}")
        trace = density_trace(pred, pair, horizon, cap=cap)
        per.append((tuple(z.tolist()), verdict_converges_to_zero(trace, tolerance, trend_window)))
        _, den = parts(np.arange(1, horizon + 1))
        guarded.append(int(np.count_nonzero(np.abs(den) < DENOMINATOR_GUARD)))
    holds = all(v.converges for _, v in per)
    return GaugeReport(True, note, tuple(per), holds, conclusion, None, tuple(guarded))

