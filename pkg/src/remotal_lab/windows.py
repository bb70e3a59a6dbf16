"""Window pairs, index predicates and finite-horizon window densities.

A window pair ``(alpha, beta)`` assigns to every index ``n`` the window
``[alpha_n, beta_n]``; the density of a set ``K`` of positive integers at
``n`` is::

    |{k in [alpha_n, beta_n] : k in K}| / (beta_n - alpha_n + 1)

Counting goes through a prefix-sum table over ``1..max beta_n`` (bounded by
the enumeration cap) unless the predicate carries a closed-form count.
"""

from __future__ import annotations

import functools
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import CertificateMismatch, HorizonExceeded, InvalidInput, InvalidWindowPair
from .reporting import csv_text

DEFAULT_CAP = 10**7
DEFAULT_TOLERANCE = 1e-2
DEFAULT_GROWTH_FLOOR = 10.0

CAP_ENV = "REMOTAL_LAB_CAP"


def enumeration_cap() -> int:
    raw = os.environ.get(CAP_ENV)
    if raw is None or raw == "":
        return DEFAULT_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise InvalidInput(f"{CAP_ENV}={raw!r} is not an integer") from None
    if cap < 1:
        raise InvalidInput(f"{CAP_ENV} must be positive, got {cap}")
    return cap


def default_trend_window(horizon: int) -> int:
    return max(1, horizon // 4)


# ---------------------------------------------------------------------------
# window pairs


@dataclass(frozen=True)
class WindowPair:
    alpha: Callable[[int], float]
    beta: Callable[[int], float]
    label: str = ""

    def bounds(self, n: int) -> tuple[float, float]:
        return float(self.alpha(n)), float(self.beta(n))

    def integer_range(self, n: int) -> tuple[int, int]:
        """Integers ``k >= 1`` with ``alpha_n <= k <= beta_n`` as ``(lo, hi)``; empty if ``hi < lo``."""
        a, b = self.bounds(n)
        _check_finite(a, b, n)
        return max(1, math.ceil(a)), math.floor(b)

    def length(self, n: int) -> float:
        a, b = self.bounds(n)
        return b - a + 1.0


def _check_finite(a, b, n):
    if not (math.isfinite(a) and math.isfinite(b)):
        raise InvalidInput(f"non-finite window bound at index n={n}: alpha={a}, beta={b}")


def classical_pair() -> WindowPair:
    return WindowPair(lambda n: 1.0, lambda n: float(n), label="[1,n]")


def poly_window(a: float = 1.0, a_exp: float = 0.0, b: float = 1.0, b_exp: float = 1.0) -> WindowPair:
    """``alpha_n = a * n**a_exp``, ``beta_n = b * n**b_exp``."""
    return WindowPair(
        lambda n: a * float(n) ** a_exp,
        lambda n: b * float(n) ** b_exp,
        label=f"[{a:g}n^{a_exp:g},{b:g}n^{b_exp:g}]",
    )


def shifted_poly(p: float = 3.0, q: float = 2.0) -> WindowPair:
    """``alpha_n = n**p``, ``beta_n = n**p + n**q``."""
    return WindowPair(
        lambda n: float(n) ** p,
        lambda n: float(n) ** p + float(n) ** q,
        label=f"[n^{p:g},n^{p:g}+n^{q:g}]",
    )


def linear_window(lo_mult: float = 1.0, hi_mult: float = 2.0) -> WindowPair:
    return WindowPair(
        lambda n: lo_mult * n,
        lambda n: hi_mult * n,
        label=f"[{lo_mult:g}n,{hi_mult:g}n]",
    )


@functools.lru_cache(maxsize=128)
def window_table(pair: WindowPair, horizon: int):
    """``(alphas, betas, los, his)`` for ``n = 1..horizon`` as read-only arrays."""
    alphas = np.empty(horizon)
    betas = np.empty(horizon)
    los = np.empty(horizon, dtype=np.int64)
    his = np.empty(horizon, dtype=np.int64)
    for i, n in enumerate(range(1, horizon + 1)):
        a, b = pair.bounds(n)
        _check_finite(a, b, n)
        alphas[i], betas[i] = a, b
        los[i], his[i] = max(1, math.ceil(a)), math.floor(b)
    for arr in (alphas, betas, los, his):
        arr.setflags(write=False)
    return alphas, betas, los, his


@dataclass(frozen=True)
class ValidationReport:
    p1: bool
    p2: bool
    p3: bool
    first_p1_violation: Optional[int] = None
    first_p2_violation: Optional[int] = None
    first_p3_violation: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.p1 and self.p2 and self.p3

    def to_dict(self):
        return {
            "p1": self.p1,
            "p2": self.p2,
            "p3": self.p3,
            "first_p1_violation": self.first_p1_violation,
            "first_p2_violation": self.first_p2_violation,
            "first_p3_violation": self.first_p3_violation,
        }


@functools.lru_cache(maxsize=128)
def validate_window_pair(
    pair: WindowPair,
    horizon: int,
    growth_floor: float = DEFAULT_GROWTH_FLOOR,
    trend_window: Optional[int] = None,
) -> ValidationReport:
    """Check monotonicity, ordering and window growth on ``1..horizon``.

    Growth of ``beta_n - alpha_n`` is a finite proxy: the length at the horizon
    must reach ``growth_floor`` and must not shrink over the last
    ``trend_window`` indices.
    """
    if horizon < 2:
        raise InvalidInput(f"horizon must be >= 2, got {horizon}")
    trend_window = trend_window or default_trend_window(horizon)
    alphas, betas, _, _ = window_table(pair, horizon)

    p1_viol = None
    for i in range(1, horizon):
        if alphas[i] < alphas[i - 1] or betas[i] < betas[i - 1]:
            p1_viol = i + 1
            break
    p2_viol = None
    bad = np.nonzero(betas < alphas)[0]
    if bad.size:
        p2_viol = int(bad[0]) + 1
    if np.any(alphas <= 0) or np.any(betas <= 0):
        # positivity is part of the definition; report it under P2's index slot
        nonpos = int(np.nonzero((alphas <= 0) | (betas <= 0))[0][0]) + 1
        p2_viol = nonpos if p2_viol is None else min(p2_viol, nonpos)

    lengths = betas - alphas
    p3_viol = None
    start = max(1, horizon - trend_window)
    for i in range(start, horizon):
        if lengths[i] < lengths[i - 1]:
            p3_viol = i + 1
            break
    if p3_viol is None and lengths[-1] < growth_floor:
        p3_viol = horizon

    return ValidationReport(
        p1=p1_viol is None,
        p2=p2_viol is None,
        p3=p3_viol is None,
        first_p1_violation=p1_viol,
        first_p2_violation=p2_viol,
        first_p3_violation=p3_viol,
    )


# ---------------------------------------------------------------------------
# index predicates


@dataclass(frozen=True)
class IndexPredicate:
    """Membership test over positive integers.

    ``mask`` is vectorised: it maps an int64 array of indices to a bool array.
    ``count``, when present, returns ``|{lo <= k <= hi : k in K}|`` in closed
    form and lets traces skip enumeration entirely.
    """

    mask: Callable[[np.ndarray], np.ndarray]
    count: Optional[Callable[[int, int], int]] = None
    label: str = ""

    def __call__(self, k: int) -> bool:
        return bool(self.mask(np.array([k], dtype=np.int64))[0])

    def negate(self) -> "IndexPredicate":
        count = None
        if self.count is not None:
            inner = self.count

            def count(lo, hi):
                return max(0, hi - lo + 1) - inner(lo, hi)

        return IndexPredicate(lambda ks: ~np.asarray(self.mask(ks), dtype=bool), count, f"not({self.label})")


def _pow2_mask(ks):
    ks = np.asarray(ks, dtype=np.int64)
    return (ks >= 2) & ((ks & (ks - 1)) == 0)


def _pow2_count(lo, hi):
    # exponents m >= 1, so 1 = 2**0 is excluded
    if hi < 2 or hi < lo:
        return 0
    top = hi.bit_length() - 1
    bottom = max(1, (max(lo, 1) - 1).bit_length())
    return max(0, top - bottom + 1)


def powers_of_two() -> IndexPredicate:
    return IndexPredicate(_pow2_mask, _pow2_count, "powers_of_two")


def isqrt_array(ks):
    ks = np.asarray(ks, dtype=np.int64)
    r = np.floor(np.sqrt(ks.astype(np.float64))).astype(np.int64)
    r = np.where(r * r > ks, r - 1, r)
    r = np.where((r + 1) * (r + 1) <= ks, r + 1, r)
    return r


def _square_mask(ks):
    ks = np.asarray(ks, dtype=np.int64)
    r = isqrt_array(ks)
    return (ks >= 1) & (r * r == ks)


def _square_count(lo, hi):
    lo = max(lo, 1)
    if hi < lo:
        return 0
    return math.isqrt(hi) - math.isqrt(lo - 1)


def perfect_squares() -> IndexPredicate:
    return IndexPredicate(_square_mask, _square_count, "perfect_squares")


def always() -> IndexPredicate:
    return IndexPredicate(
        lambda ks: np.ones(np.shape(ks), dtype=bool), lambda lo, hi: max(0, hi - max(lo, 1) + 1), "always"
    )


def never() -> IndexPredicate:
    return IndexPredicate(lambda ks: np.zeros(np.shape(ks), dtype=bool), lambda lo, hi: 0, "never")


def from_membership(fn: Callable[[int], bool], label: str = "") -> IndexPredicate:
    """Wrap a scalar membership test (slow path, no certificate)."""

    def mask(ks):
        return np.fromiter((bool(fn(int(k))) for k in np.asarray(ks).ravel()), dtype=bool, count=np.size(ks))

    return IndexPredicate(mask, None, label)


# ---------------------------------------------------------------------------
# counting and traces


def _enumerate_count(pred, lo, hi):
    if hi < lo:
        return 0
    return int(np.count_nonzero(pred.mask(np.arange(lo, hi + 1, dtype=np.int64))))


def window_count(pred: IndexPredicate, pair: WindowPair, n: int, cap: Optional[int] = None) -> int:
    """Exact number of integers ``k`` in ``[alpha_n, beta_n]`` satisfying ``pred``.

    With a closed-form count the result is cross-checked against enumeration
    whenever the window fits under the cap.
    """
    cap = enumeration_cap() if cap is None else cap
    lo, hi = pair.integer_range(n)
    if pred.count is not None:
        c = int(pred.count(lo, hi))
        if hi <= cap:
            brute = _enumerate_count(pred, lo, hi)
            if brute != c:
                raise CertificateMismatch(
                    f"{pred.label}: closed-form count {c} != enumerated {brute} on [{lo},{hi}] (n={n})"
                )
        return c
    if hi > cap:
        raise HorizonExceeded(f"window [{lo},{hi}] at n={n} exceeds enumeration cap {cap}")
    return _enumerate_count(pred, lo, hi)


@dataclass(frozen=True)
class DensityTrace:
    window_pair: WindowPair
    ns: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray
    counts: np.ndarray
    densities: np.ndarray
    horizon: int
    certified: bool = False

    @property
    def values(self) -> list[tuple[int, float]]:
        return [(int(n), float(d)) for n, d in zip(self.ns, self.densities)]

    def density_at(self, n: int) -> float:
        return float(self.densities[n - 1])

    def count_at(self, n: int) -> int:
        return int(self.counts[n - 1])

    def csv_rows(self):
        for n, a, b, c, d in zip(self.ns, self.alphas, self.betas, self.counts, self.densities):
            yield (int(n), float(a), float(b), int(c), float(d))

    def to_csv(self) -> str:
        return csv_text(["n", "alpha", "beta", "count", "density"], self.csv_rows())


def density_trace(
    pred: IndexPredicate,
    pair: WindowPair,
    horizon: int,
    cap: Optional[int] = None,
    verify: bool = False,
    validate: bool = True,
) -> DensityTrace:
    """Window densities of ``pred`` for ``n = 1..horizon``.

    Uses the predicate's closed-form count when present (no cap applies);
    otherwise one prefix-sum pass over ``1..max(beta_n)``. ``verify=True``
    additionally enumerates certified traces when they fit under the cap.
    """
    if horizon < 1:
        raise InvalidInput(f"horizon must be positive, got {horizon}")
    if validate and horizon >= 2:
        report = validate_window_pair(pair, horizon)
        if not report.ok:
            raise InvalidWindowPair(f"window pair {pair.label!r} fails validation at horizon {horizon}: {report.to_dict()}")
    cap = enumeration_cap() if cap is None else cap

    ns = np.arange(1, horizon + 1, dtype=np.int64)
    alphas, betas, los, his = window_table(pair, horizon)

    top = int(his.max())
    counts = np.zeros(horizon, dtype=np.int64)
    if pred.count is not None:
        for i in range(horizon):
            counts[i] = pred.count(int(los[i]), int(his[i])) if his[i] >= los[i] else 0
        if verify and top <= cap:
            brute = _prefix_counts(pred, los, his, top)
            bad = np.nonzero(brute != counts)[0]
            if bad.size:
                i = int(bad[0])
                raise CertificateMismatch(
                    f"{pred.label}: closed-form count {counts[i]} != enumerated {brute[i]} at n={i + 1}"
                )
    else:
        if top > cap:
            first = int(np.nonzero(his > cap)[0][0]) + 1
            raise HorizonExceeded(f"window end {int(his[first - 1])} at n={first} exceeds enumeration cap {cap}")
        counts = _prefix_counts(pred, los, his, top)

    lengths = betas - alphas + 1.0
    densities = counts / lengths
    return DensityTrace(pair, ns, alphas, betas, counts, densities, horizon, certified=pred.count is not None)


def _prefix_counts(pred, los, his, top):
    if top < 1:
        return np.zeros(len(los), dtype=np.int64)
    mask = np.asarray(pred.mask(np.arange(1, top + 1, dtype=np.int64)), dtype=bool)
    cs = np.zeros(top + 1, dtype=np.int64)
    np.cumsum(mask, out=cs[1:])
    his_c = np.clip(his, 0, top)
    los_c = np.clip(los, 1, top + 1)
    out = cs[his_c] - cs[los_c - 1]
    return np.where(his >= los, out, 0)


# ---------------------------------------------------------------------------
# verdicts


class Status(str, Enum):
    CONVERGES_TO_ZERO = "ConvergesToZero"
    DOES_NOT_CONVERGE = "DoesNotConverge"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Verdict:
    status: Status
    final_value: float
    max_tail: float
    min_tail: float
    horizon: int
    tolerance: float
    trend_window: int
    trace: Optional[DensityTrace] = field(default=None, compare=False, repr=False)

    @property
    def converges(self) -> bool:
        return self.status is Status.CONVERGES_TO_ZERO

    def to_dict(self):
        return {
            "status": self.status.value,
            "final_value": self.final_value,
            "max_tail": self.max_tail,
            "min_tail": self.min_tail,
            "horizon": self.horizon,
            "tolerance": self.tolerance,
            "trend_window": self.trend_window,
        }


def verdict_from_values(values, tolerance: float = DEFAULT_TOLERANCE, trend_window: Optional[int] = None, trace=None) -> Verdict:
    """Three-valued limit verdict for a finite stretch of non-negative values.

    The final ``trend_window`` values are split into two halves.

    * ConvergesToZero: every tail value is below ``tolerance`` and the
      second half's maximum does not exceed the first half's.
    * DoesNotConverge: every tail value is at least ``tolerance`` and the
      second half's minimum has not dropped below the first half's, i.e. a
      positive floor persists.
    * Inconclusive otherwise.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise InvalidInput("empty trace")
    if not tolerance > 0:
        raise InvalidInput(f"tolerance must be > 0, got {tolerance}")
    horizon = values.size
    trend_window = trend_window or default_trend_window(horizon)
    if not 1 <= trend_window <= horizon:
        raise InvalidInput(f"trend_window must lie in [1, {horizon}], got {trend_window}")

    tail = values[-trend_window:]
    half = trend_window // 2
    first = tail[: max(half, 1)]
    second = tail[half:]
    tmax, tmin = float(tail.max()), float(tail.min())

    if tmax < tolerance and second.max() <= first.max():
        status = Status.CONVERGES_TO_ZERO
    elif tmin >= tolerance and second.min() >= first.min():
        status = Status.DOES_NOT_CONVERGE
    else:
        status = Status.INCONCLUSIVE
    return Verdict(status, float(values[-1]), tmax, tmin, horizon, float(tolerance), trend_window, trace)


def verdict_converges_to_zero(
    trace: DensityTrace, tolerance: float = DEFAULT_TOLERANCE, trend_window: Optional[int] = None
) -> Verdict:
    if trace.densities.size == 0:
        raise InvalidInput("empty trace")
    if trend_window is not None and trend_window > trace.horizon:
        raise InvalidInput(f"trend_window {trend_window} exceeds horizon {trace.horizon}")
    return verdict_from_values(trace.densities, tolerance, trend_window, trace=trace)
