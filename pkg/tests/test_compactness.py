import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from remotal_lab import compactness as c
from remotal_lab import seqlab as s
from remotal_lab import windows as w
from remotal_lab.errors import DomainError, InvalidSubset
from remotal_lab.geometry import BoundedSet, NormedSpace
from remotal_lab.windows import Status

SQ = w.poly_window(b_exp=2)
INTERVAL = BoundedSet.interval(-1, 1)
LINE = NormedSpace(1, 2)
PLANE = NormedSpace(2, 2)
TWO = BoundedSet.cloud([[0, 0], [1, 0]])


# -- slabs ------------------------------------------------------------------

def test_slab_zero_is_empty():
    assert c.slab(0.0, INTERVAL, 0.0, LINE).size == 0


@pytest.mark.parametrize("t", [1.0, 0.5])
def test_slab_keeps_both_endpoints(t):
    assert c.slab(0.0, INTERVAL, t, LINE).tolist() == [[-1.0], [1.0]]


def test_negative_t_rejected():
    with pytest.raises(DomainError):
        c.slab(0.0, INTERVAL, -0.1, LINE)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), p=st.sampled_from([1.0, 2.0, math.inf]), t1=st.floats(0, 3), t2=st.floats(0, 3))
def test_slab_monotone_and_matches_oracle(seed, p, t1, t2):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    pts = rng.normal(size=(int(rng.integers(1, 20)), d))
    x = rng.normal(size=d)
    sp = NormedSpace(d, p)
    E = BoundedSet.cloud(pts)
    lo, hi = sorted((t1, t2))
    small = {tuple(q) for q in c.slab(x, E, lo, sp).tolist()}
    big = {tuple(q) for q in c.slab(x, E, hi, sp).tolist()}
    assert small <= big
    assert big == {tuple(q) for q in oracles.slab(x.tolist(), pts.tolist(), p, hi)}
    prof = c.SlabProfile(x, E, sp)
    d_lo, d_hi = prof.diam([lo, hi])
    assert d_lo <= d_hi
    assert d_hi == oracles.diameter(sorted(big), p)


# -- x-compactness ----------------------------------------------------------

def test_interval_not_zero_compact():
    v = c.x_compact_verdict(0.0, INTERVAL, LINE, 200)
    assert v.diam_verdict.status is Status.DOES_NOT_CONVERGE
    assert np.all(v.trace.diams == 2.0)


def test_singleton_compact():
    v = c.x_compact_verdict([1.0, 1.0], BoundedSet.cloud([[3.0, -2.0]]), PLANE, 100)
    assert v.positive


def test_two_points_compact_from_the_left():
    v = c.x_compact_verdict([-1.0, 0.0], TWO, PLANE, 100)
    assert v.positive
    assert np.all(v.trace.slab_sizes[1:] == 1)


def test_square_witness_makes_interval_ab_compact():
    v = c.x_ab_compact_verdict(0.0, INTERVAL, LINE, s.square_indicator(), SQ, 100, 0.5, tolerance=0.05)
    assert v.positive and v.degenerate_witness


def test_square_witness_tables():
    v = c.x_ab_compact_verdict(0.0, INTERVAL, LINE, s.square_indicator(), SQ, 400, 0.5)
    sq = [oracles.is_square(n) for n in range(1, 401)]
    assert v.trace.diams.tolist() == [2.0 if q else 0.0 for q in sq]
    assert v.t_verdict.trace.densities.tolist() == [1 / n for n in range(1, 401)]


def test_constant_witness_fails():
    v = c.x_ab_compact_verdict(0.0, INTERVAL, LINE, s.constant(1.0), SQ, 100, 0.5)
    assert v.t_verdict.status is Status.DOES_NOT_CONVERGE and not v.positive


def test_negative_witness_rejected():
    t = s.LabSequence(lambda ks: np.where(ks == 5, -1.0, 1.0 / ks), "neg")
    with pytest.raises(DomainError, match="n=5"):
        c.x_ab_compact_verdict(0.0, INTERVAL, LINE, t, SQ, 50, 0.5)


def test_x_compact_implies_ab_compact_two_points():
    assert c.x_compact_verdict([-1.0, 0.0], TWO, PLANE, 200).positive
    # {1/k >= 0.05} has 20 members: [1, n] needs a long horizon before 20/n < 0.01
    for pair, horizon in ((w.classical_pair(), 4000), (SQ, 200), (w.linear_window(1, 2), 200)):
        v = c.x_ab_compact_verdict([-1.0, 0.0], TWO, PLANE, s.harmonic(), pair, horizon, 0.05)
        assert v.positive and not v.degenerate_witness


# -- attainment and max-Chebyshev ------------------------------------------

def test_attainment_on_interval():
    v = c.x_ab_compact_verdict(0.0, INTERVAL, LINE, s.square_indicator(), SQ, 100, 0.5, tolerance=0.05)
    a = c.attainment_check(0.0, INTERVAL, LINE, v)
    assert a.attained and a.attainers == ((-1.0,), (1.0,)) and a.implication_holds


def test_attainment_singleton_and_pair():
    a = c.attainment_check([0.0], BoundedSet.cloud([[2.0]]), LINE)
    assert a.attained and a.unique
    a = c.attainment_check([-1.0, 0.0], TWO, PLANE)
    assert a.attainers == ((1.0, 0.0),) and a.unique


def test_max_chebyshev_flags():
    assert c.max_chebyshev_check([-1.0, 0.0], TWO, PLANE)
    assert not c.max_chebyshev_check(0.0, INTERVAL, LINE)
    assert c.max_chebyshev_check([7.0], BoundedSet.cloud([[1.0]]), LINE)


# -- partial compactness ----------------------------------------------------

def test_partial_from_off_centre():
    r = c.partial_ab_compact_check(0.5, INTERVAL, LINE, BoundedSet.cloud([[-1.0]]))
    assert r.positive and r.delta_E == r.delta_H == 1.5


def test_partial_endpoint_from_centre():
    assert c.partial_ab_compact_check(0.0, INTERVAL, LINE, BoundedSet.cloud([[1.0]])).positive


def test_partial_delta_mismatch():
    r = c.partial_ab_compact_check(0.0, INTERVAL, LINE, BoundedSet.cloud([[0.0]]))
    assert not r.delta_match and not r.positive


def test_partial_requires_subset():
    with pytest.raises(InvalidSubset):
        c.partial_ab_compact_check(0.0, INTERVAL, LINE, BoundedSet.cloud([[1.5]]))


def test_slab_trace_csv_header():
    tr = c.slab_trace(0.0, INTERVAL, LINE, [0.0, 1.0])
    assert tr.to_csv().splitlines() == ["n,t_n,slab_size,diam", "1,0,0,0", "2,1,2,2"]
