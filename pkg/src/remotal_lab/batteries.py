"""Seeded batteries that exercise each theorem as an implication on finite instances.

Every battery returns a :class:`BatteryReport`; ``passed`` is False as soon
as one generated instance satisfies the hypothesis but not the conclusion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .compactness import (
    attainment_check,
    max_chebyshev_check,
    partial_ab_compact_check,
    x_ab_compact_verdict,
    x_compact_verdict,
)
from .gauge import power_gauge, remotality_hypothesis_div, remotality_hypothesis_ratio
from .geometry import BoundedSet, NormedSpace, farthest_distance, farthest_points
from .seqlab import constant, convergent_probe, harmonic, is_ab_stat_maximizing, is_maximizing, square_indicator
from .windows import classical_pair, linear_window, poly_window

NORMS = (1.0, 2.0, math.inf)

# (pair, horizon): horizons are sized so finitely many exceptions in the
# first ~20 indices fall below the default tolerance inside the trend window
BATTERY_PAIRS = (
    (classical_pair, 4000),
    (lambda: poly_window(b_exp=2), 200),
    (lambda: linear_window(1, 2), 200),
)


@dataclass
class BatteryReport:
    name: str
    passed: bool
    summary: dict
    instances: list = field(default_factory=list)

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "summary": self.summary, "instances": self.instances}


def _p_label(p):
    return "inf" if math.isinf(p) else p


def _random_cloud(rng, d, m, spread=1.0):
    return BoundedSet.cloud(rng.uniform(-spread, spread, size=(m, d)))


def farthest_gap(x, E, space):
    """``delta`` minus the largest distance strictly below it among candidates."""
    d = np.unique(space.distances(x, E.candidates()))
    return float(d[-1] - d[-2]) if d.size > 1 else math.inf


def z1_instances(seed: int, count: int, min_gap: float = 0.05, horizon: int = 200):
    """``count`` x-compact instances (clouds, d <= 3) whose farthest gap is at least ``min_gap``."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        d = int(rng.integers(1, 4))
        space = NormedSpace(d, NORMS[int(rng.integers(0, 3))])
        E = _random_cloud(rng, d, int(rng.integers(2, 13)))
        x = rng.uniform(-2, 2, size=d)
        if farthest_gap(x, E, space) < min_gap:
            continue
        if not x_compact_verdict(x, E, space, horizon).positive:
            continue
        out.append((x, E, space))
    return out


def z1_battery(seed: int = 0, count: int = 50, eps: float = 0.05) -> BatteryReport:
    """x-compact implies x-(alpha beta)-compact with ``t_n = 1/n``, for three pairs."""
    rows = []
    ok = True
    for i, (x, E, space) in enumerate(z1_instances(seed, count)):
        for make_pair, horizon in BATTERY_PAIRS:
            pair = make_pair()
            v = x_ab_compact_verdict(x, E, space, harmonic(), pair, horizon, eps)
            ok &= v.positive
            rows.append({
                "instance": i,
                "pair": pair.label,
                "space": space.label,
                "hypothesis_verdict": "xCompact",
                "conclusion_flags": {"x_ab_compact": v.positive, "t": v.t_verdict.status.value, "diam": v.diam_verdict.status.value},
            })
    return BatteryReport("theorem-z1", ok, {"instances": count, "pairs": len(BATTERY_PAIRS), "checks": len(rows)}, rows)


def maximizing_battery(seed: int = 0, count: int = 50, eps: float = 0.5) -> BatteryReport:
    """Ordinary maximizing sequences in boxes are (alpha beta)-maximizing for three pairs.

    Each sequence approaches a farthest vertex ``e`` from an interior point:
    ``x_n = e + (m - e) / n``.
    """
    rng = np.random.default_rng(seed)
    rows = []
    ok = True
    made = 0
    while made < count:
        d = int(rng.integers(1, 4))
        space = NormedSpace(d, NORMS[int(rng.integers(0, 3))])
        lo = rng.uniform(-1, 0, size=d)
        hi = lo + rng.uniform(0.2, 1.5, size=d)
        box = BoundedSet.box(lo, hi)
        x = rng.uniform(-2, 2, size=d)
        e = np.array(farthest_points(x, box, space).attainers[0])
        m = rng.uniform(lo, hi)
        seq = convergent_probe(e, m - e)
        ordinary = is_maximizing(seq, x, box, space, eps, 200)
        if not ordinary.maximizing:
            continue
        for make_pair, horizon in BATTERY_PAIRS:
            pair = make_pair()
            v = is_ab_stat_maximizing(seq, x, box, space, eps, pair, horizon)
            ok &= v.converges
            rows.append({
                "instance": made,
                "pair": pair.label,
                "space": space.label,
                "hypothesis_verdict": "maximizing",
                "conclusion_flags": {"ab_stat_maximizing": v.status.value},
            })
        made += 1
    return BatteryReport("theorem-maximizing", ok, {"instances": count, "checks": len(rows)}, rows)


def partial_compact_battery(seed: int = 0, count: int = 50) -> BatteryReport:
    """Partial x-(alpha beta)-compactness iff the farthest distance is attained.

    Forward: ``H = {first attainer}`` must give a positive check. Converse: for
    a random sub-cloud ``H``, a positive check must come with an attainer of
    ``E`` inside ``H``.
    """
    rng = np.random.default_rng(seed)
    rows = []
    ok = True
    for i in range(count):
        d = int(rng.integers(1, 4))
        space = NormedSpace(d, NORMS[int(rng.integers(0, 3))])
        if rng.random() < 0.5:
            E = _random_cloud(rng, d, int(rng.integers(2, 13)))
        else:
            lo = rng.uniform(-1, 0, size=d)
            E = BoundedSet.box(lo, lo + rng.uniform(0.2, 1.5, size=d))
        x = rng.uniform(-2, 2, size=d)
        att = attainment_check(x, E, space)
        H1 = BoundedSet.cloud([att.attainers[0]])
        forward = partial_ab_compact_check(x, E, space, H1).positive
        cand = np.asarray(E.candidates())
        pick = rng.random(len(cand)) < 0.5
        pick[int(rng.integers(0, len(cand)))] = True
        H2 = BoundedSet.cloud(cand[pick])
        res2 = partial_ab_compact_check(x, E, space, H2)
        delta = farthest_distance(x, E, space)
        h_attains = bool(np.any(space.distances(x, cand[pick]) >= delta - 1e-9 * (1 + delta)))
        converse = (not res2.positive) or (att.attained and h_attains)
        ok &= att.attained and forward and converse
        rows.append({
            "instance": i,
            "space": space.label,
            "hypothesis_verdict": {"attained": att.attained, "random_H_positive": res2.positive},
            "conclusion_flags": {"singleton_H_positive": forward, "converse_holds": converse},
        })
    return BatteryReport("theorem-partial-compact", ok, {"instances": count}, rows)


def max_chebyshev_battery(seed: int = 0, count: int = 50, eps: float = 0.05) -> BatteryReport:
    """Positive x-(alpha beta)-compactness verdicts versus uniqueness of the farthest point.

    Non-degenerate witnesses (``t_n = 1/n``) are asserted to give a unique
    farthest point. The square-indexed witness on ``[-1, 1]`` at ``x = 0`` is
    only reported: it is positive although ``F(0, E) = {-1, 1}``.
    """
    rows = []
    ok = True
    pair = poly_window(b_exp=2)
    for i, (x, E, space) in enumerate(z1_instances(seed, count)):
        v = x_ab_compact_verdict(x, E, space, harmonic(), pair, 200, eps)
        unique = max_chebyshev_check(x, E, space, v)
        asserted = v.positive and not v.degenerate_witness
        ok &= (not asserted) or unique
        rows.append({
            "instance": i,
            "space": space.label,
            "hypothesis_verdict": v.diam_verdict.status.value if v.positive else "negative",
            "conclusion_flags": {"max_chebyshev": unique, "asserted": asserted, "degenerate_witness": v.degenerate_witness},
        })
    I = BoundedSet.interval(-1, 1)
    sp = NormedSpace(1, 2)
    v = x_ab_compact_verdict(0.0, I, sp, square_indicator(), pair, 100, 0.5, tolerance=0.05)
    unique = max_chebyshev_check(0.0, I, sp, v)
    discrepancy = {
        "instance": "interval[-1,1], x=0, t_n = 1 on squares else 0",
        "hypothesis_verdict": "positive" if v.positive else "negative",
        "conclusion_flags": {"max_chebyshev": unique, "asserted": False, "degenerate_witness": v.degenerate_witness},
        "note": "positive verdict with two farthest points; reported, not asserted",
    }
    rows.append(discrepancy)
    return BatteryReport(
        "theorem-max-chebyshev",
        ok,
        {"instances": count, "discrepancy_reported": v.positive and not unique},
        rows,
    )


def gauge_battery(seed: int = 0, count: int = 100, min_margin: float = 1.0, max_attempts: int = 20000) -> BatteryReport:
    """Divergence-criterion soundness plus the ratio-criterion sign example.

    Instances are random clouds (<= 20 points, d <= 3) with ``phi`` in
    ``{t, t^2}`` and a probe ``x_n = x + v/n``. Half the time ``y`` is a
    farthest point, otherwise a random cloud member. A probe converging to
    ``x`` keeps every difference sequence bounded, so divergence is judged on
    the small grid ``M in {0.25, 0.5, 1}``. Only all-positive instances with
    margin at least ``min_margin`` are kept, and each must have
    ``||x - y|| = delta(x, E)``.
    """
    rng = np.random.default_rng(seed)
    pair = poly_window(b_exp=2)
    horizon = 100
    grid = (0.25, 0.5, 1.0)
    rows = []
    ok = True
    attempts = 0
    while len(rows) < count and attempts < max_attempts:
        attempts += 1
        d = int(rng.integers(1, 4))
        space = NormedSpace(d, NORMS[int(rng.integers(0, 3))])
        pts = rng.uniform(-3, 3, size=(int(rng.integers(2, 21)), d))
        E = BoundedSet.cloud(pts)
        x = rng.uniform(-3, 3, size=d)
        if rng.random() < 0.5:
            y = np.array(farthest_points(x, E, space).attainers[0])
        else:
            y = pts[int(rng.integers(0, len(pts)))]
        v = rng.normal(size=d)
        v *= rng.uniform(0.05, 0.5) / max(np.linalg.norm(v), 1e-12)
        phi = power_gauge(1 if rng.random() < 0.5 else 2)
        rep = remotality_hypothesis_div(phi, convergent_probe(x, v), x, y, E, space, pair, horizon, grid)
        if not (rep.hypothesis_holds and rep.margin is not None and rep.margin >= min_margin):
            continue
        ok &= rep.conclusion_holds
        rows.append({
            "instance": len(rows),
            "space": space.label,
            "phi": phi.label,
            "hypothesis_verdict": {"all_positive": True, "margin": rep.margin},
            "conclusion_flags": {"y_attains_delta": rep.conclusion_holds},
        })
    collected = len(rows)
    ok &= collected == count

    # ratio criterion: E={0,2}, x=0, y=0, z=2, constant probe -> ratio 0 but y is not farthest
    sp = NormedSpace(1, 2)
    sign_rep = remotality_hypothesis_ratio(
        power_gauge(1), constant(0.0), 0.0, 0.0, BoundedSet.cloud([[0.0], [2.0]]), sp, classical_pair(), 0.5, 200
    )
    ok &= sign_rep.conclusion_violated
    rows.append({
        "instance": "ratio sign subtlety: E={0,2}, x=0, y=0",
        "hypothesis_verdict": {"all_positive": sign_rep.hypothesis_holds},
        "conclusion_flags": {"conclusion_violated": sign_rep.conclusion_violated},
        "note": "reported, not asserted as a theorem instance",
    })
    return BatteryReport(
        "gauge-soundness",
        ok,
        {"instances": collected, "attempts": attempts, "ratio_sign_instance_violated": sign_rep.conclusion_violated},
        rows,
    )


BATTERIES = {
    "z1": z1_battery,
    "maximizing": maximizing_battery,
    "partial_compact": partial_compact_battery,
    "max_chebyshev": max_chebyshev_battery,
    "gauge": gauge_battery,
}
