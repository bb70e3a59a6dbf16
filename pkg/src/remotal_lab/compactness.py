"""Slabs ``E - B_t(x)``, their diameter traces, and x-(alpha beta)-compactness checks.

``B_t(x)`` is the closed ball of radius ``delta(x, E) - t`` about ``x``; the
slab keeps the points of ``E`` strictly outside it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, InvalidSubset
from .geometry import (
    BoundedSet,
    NormedSpace,
    as_point,
    default_delta_unique,
    diameter,
    farthest_distance,
    farthest_points,
)
from .reporting import csv_text
from .seqlab import LabSequence, ab_stat_converges, harmonic
from .windows import (
    DEFAULT_TOLERANCE,
    Verdict,
    WindowPair,
    poly_window,
    default_trend_window,
    enumeration_cap,
    verdict_from_values,
)


class SlabProfile:
    """Slab diameters of ``(x, E)`` as a step function of ``t``.

    Candidates sorted by decreasing distance from ``x``; the slab at ``t`` is
    always a prefix of that order, so prefix diameters answer every query.
    """

    def __init__(self, x, E: BoundedSet, space: NormedSpace):
        if E.is_empty:
            raise DomainError("slabs need a non-empty set")
        self.x = as_point(x, space.dim)
        self.space = space
        cand = np.asarray(E.candidates())
        d = space.distances(self.x, cand)
        self.delta = float(d.max())
        order = np.argsort(-d, kind="stable")
        self.points = cand[order]
        self.dists = d[order]
        pd = np.zeros(len(order) + 1)
        for j in range(1, len(order)):
            pd[j + 1] = max(pd[j], float(space.distances(self.points[j], self.points[:j]).max()))
        self.prefix_diam = pd

    def sizes(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("slab parameter t must be >= 0")
        thr = self.delta - t
        # members satisfy dist > delta - t; dists are sorted descending
        return np.searchsorted(-self.dists, -thr, side="left")

    def diam(self, t) -> np.ndarray:
        return self.prefix_diam[self.sizes(t)]

    def members(self, t: float) -> np.ndarray:
        k = int(self.sizes(np.array([t]))[0])
        pts = self.points[:k]
        return np.unique(pts, axis=0) if k else pts.reshape(0, self.space.dim)


def slab(x, E: BoundedSet, t: float, space: NormedSpace) -> np.ndarray:
    """Candidate points ``e`` of ``E`` with ``||x - e|| > delta(x, E) - t``, lexicographically sorted."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    return SlabProfile(x, E, space).members(t)


@dataclass(frozen=True)
class SlabTrace:
    x: tuple
    ns: np.ndarray
    t_values: np.ndarray
    slab_sizes: np.ndarray
    diams: np.ndarray

    def to_csv(self) -> str:
        rows = zip(self.ns.tolist(), self.t_values.tolist(), self.slab_sizes.tolist(), self.diams.tolist())
        return csv_text(["n", "t_n", "slab_size", "diam"], rows)


def slab_trace(x, E: BoundedSet, space: NormedSpace, t_values, profile: Optional[SlabProfile] = None) -> SlabTrace:
    prof = profile or SlabProfile(x, E, space)
    t = np.asarray(t_values, dtype=float)
    return SlabTrace(
        tuple(prof.x.tolist()), np.arange(1, t.size + 1), t, prof.sizes(t), prof.diam(t)
    )


@dataclass(frozen=True)
class CompactnessVerdict:
    kind: str  # "xCompact" | "xAlphaBetaCompact"
    diam_verdict: Verdict
    t_verdict: Optional[Verdict]
    trace: SlabTrace
    degenerate_witness: bool = False

    @property
    def positive(self) -> bool:
        if self.kind == "xCompact":
            return self.diam_verdict.converges
        return self.diam_verdict.converges and self.t_verdict is not None and self.t_verdict.converges

    def to_dict(self):
        return {
            "kind": self.kind,
            "positive": self.positive,
            "diam_verdict": self.diam_verdict.to_dict(),
            "t_verdict": None if self.t_verdict is None else self.t_verdict.to_dict(),
            "degenerate_witness": self.degenerate_witness,
        }


def x_compact_verdict(
    x,
    E: BoundedSet,
    space: NormedSpace,
    horizon: int,
    tolerance: float = DEFAULT_TOLERANCE,
    trend_window: Optional[int] = None,
) -> CompactnessVerdict:
    """Ordinary convergence proxy for ``diam(E - B_{1/n}(x)) -> 0``."""
    ns = np.arange(1, horizon + 1, dtype=float)
    trace = slab_trace(x, E, space, 1.0 / ns)
    v = verdict_from_values(trace.diams, tolerance, trend_window)
    return CompactnessVerdict("xCompact", v, None, trace)


def _check_nonnegative(t_seq: LabSequence, upto: int):
    if t_seq.level_sets is not None:
        for value, _ in t_seq.level_sets:
            if value < 0:
                raise DomainError(f"t sequence {t_seq.label!r} takes the negative value {value}")
        return
    vals = t_seq.values(np.arange(1, upto + 1))
    bad = np.nonzero(vals < 0)[0]
    if bad.size:
        raise DomainError(f"t sequence {t_seq.label!r} is negative at n={int(bad[0]) + 1}: {vals[bad[0]]}")


def x_ab_compact_verdict(
    x,
    E: BoundedSet,
    space: NormedSpace,
    t_seq: LabSequence,
    pair: WindowPair,
    horizon: int,
    eps: float,
    tolerance: float = DEFAULT_TOLERANCE,
    trend_window: Optional[int] = None,
    cap: Optional[int] = None,
) -> CompactnessVerdict:
    """Both ``t_n -> 0`` and ``diam(E - B_{t_n}(x)) -> 0`` in the (alpha, beta) sense.

    ``degenerate_witness`` flags a witness with ``t_n = 0`` somewhere in the
    final trend window: there the slab is empty whatever the shape of ``E``.
    """
    cap_ = enumeration_cap() if cap is None else cap
    _, hi = pair.integer_range(horizon)
    _check_nonnegative(t_seq, min(max(hi, horizon), cap_))
    prof = SlabProfile(x, E, space)
    t_verdict = ab_stat_converges(t_seq, 0.0, eps, pair, horizon, tolerance, trend_window, cap)
    diam_seq = t_seq.map(prof.diam, label=f"diam(E - B_t[{t_seq.label}])")
    diam_verdict = ab_stat_converges(diam_seq, 0.0, eps, pair, horizon, tolerance, trend_window, cap)
    t_head = t_seq.values(np.arange(1, horizon + 1))
    trace = slab_trace(x, E, space, t_head, prof)
    w = trend_window or default_trend_window(horizon)
    degenerate = bool(np.any(t_head[-w:] == 0.0))
    return CompactnessVerdict("xAlphaBetaCompact", diam_verdict, t_verdict, trace, degenerate)


@dataclass(frozen=True)
class AttainmentResult:
    attained: bool
    attainers: tuple
    unique: bool
    hypothesis_positive: bool

    @property
    def implication_holds(self) -> bool:
        return (not self.hypothesis_positive) or self.attained

    def to_dict(self):
        return {
            "attained": self.attained,
            "attainers": [list(a) for a in self.attainers],
            "unique": self.unique,
            "hypothesis_positive": self.hypothesis_positive,
            "implication_holds": self.implication_holds,
        }


def attainment_check(
    x, E: BoundedSet, space: NormedSpace, verdict: Optional[CompactnessVerdict] = None, eps_far: Optional[float] = None
) -> AttainmentResult:
    fr = farthest_points(x, E, space, eps_far)
    return AttainmentResult(
        attained=len(fr.attainers) > 0,
        attainers=fr.attainers,
        unique=fr.unique,
        hypothesis_positive=bool(verdict is not None and verdict.positive),
    )


def max_chebyshev_check(
    x, E: BoundedSet, space: NormedSpace, verdict: Optional[CompactnessVerdict] = None, delta_unique: Optional[float] = None
) -> bool:
    """True iff the farthest point of ``E`` from ``x`` is unique (attainer diameter <= delta_unique)."""
    fr = farthest_points(x, E, space)
    tol = default_delta_unique(fr.distance) if delta_unique is None else delta_unique
    return diameter(fr.attainer_array, space) <= tol


@dataclass(frozen=True)
class PartialCompactResult:
    delta_match: bool
    delta_E: float
    delta_H: float
    h_verdict: CompactnessVerdict

    @property
    def positive(self) -> bool:
        return self.delta_match and self.h_verdict.positive

    def to_dict(self):
        return {
            "positive": self.positive,
            "delta_match": self.delta_match,
            "delta_E": self.delta_E,
            "delta_H": self.delta_H,
            "h_verdict": self.h_verdict.to_dict(),
        }


def check_subset(H: BoundedSet, E: BoundedSet, tol: float = 1e-12):
    if H.dim != E.dim:
        raise InvalidSubset(f"H has dimension {H.dim}, E has dimension {E.dim}")
    for p in np.asarray(H.candidates()):
        if not E.contains(p, tol):
            raise InvalidSubset(f"point {p.tolist()} of H is not in E")


def partial_ab_compact_check(
    x,
    E: BoundedSet,
    space: NormedSpace,
    H: BoundedSet,
    t_seq: Optional[LabSequence] = None,
    pair: Optional[WindowPair] = None,
    horizon: int = 200,
    eps: float = 0.05,
    tolerance: float = DEFAULT_TOLERANCE,
    trend_window: Optional[int] = None,
    eps_far: Optional[float] = None,
    cap: Optional[int] = None,
) -> PartialCompactResult:
    """``H`` matches the farthest distance of ``E`` from ``x`` and is x-(alpha beta)-compact."""
    if H.is_empty:
        raise InvalidSubset("H must be non-empty")
    check_subset(H, E)
    t_seq = t_seq or harmonic()
    pair = pair or poly_window(b_exp=2)
    dE = farthest_distance(x, E, space)
    dH = farthest_distance(x, H, space)
    tol = (1e-9 * (1.0 + dE)) if eps_far is None else eps_far
    hv = x_ab_compact_verdict(x, H, space, t_seq, pair, horizon, eps, tolerance, trend_window, cap)
    return PartialCompactResult(abs(dE - dH) <= tol, dE, dH, hv)

