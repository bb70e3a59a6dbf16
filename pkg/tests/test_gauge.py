import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from remotal_lab import gauge as g
from remotal_lab import seqlab as s
from remotal_lab import windows as w
from remotal_lab.errors import DomainError, InvalidInput
from remotal_lab.geometry import BoundedSet, NormedSpace
from remotal_lab.windows import Status

LINE = NormedSpace(1, 2)
CLASSIC = w.classical_pair()


def test_power_gauge_values():
    assert g.power_gauge(1)(2.0) == 2.0
    assert g.power_gauge(2)(3.0) == 9.0
    assert g.power_gauge(1.5)(0.0) == 0.0


def test_power_gauge_domain():
    with pytest.raises(DomainError):
        g.power_gauge(0.5)


@pytest.mark.parametrize("p", [1, 1.5, 2, 3])
def test_power_gauge_in_class(p):
    assert g.power_gauge(p).check().ok


def test_non_gauge_detected():
    bump = g.GaugeFunction(lambda t: np.where(t > 1, t + 1, t), "jump")
    chk = bump.check()
    assert chk.phi_zero and chk.strictly_increasing and not chk.continuous
    flat = g.GaugeFunction(lambda t: np.minimum(t, 1.0), "flat")
    assert not flat.check().strictly_increasing


def test_bounded_differences_fail_hypothesis():
    E = BoundedSet.cloud([[0.0], [10.0]])
    rep = g.remotality_hypothesis_div(g.power_gauge(1), s.constant(0.0), 0.0, 10.0, E, LINE, CLASSIC, 200, (1, 10, 100))
    assert rep.precondition_ok and not rep.hypothesis_holds
    assert not rep.conclusion_violated
    # only z = 0 is checked; the difference is the constant 10
    assert [z for z, _ in rep.per_z] == [(0.0,)]
    assert rep.margin == 10.0


def test_diverging_probe_is_a_precondition_failure():
    E = BoundedSet.cloud([[0.0], [1.0]])
    probe = s.LabSequence(lambda ks: -ks.astype(float), "minus_n")
    rep = g.remotality_hypothesis_div(g.power_gauge(1), probe, 0.0, 1.0, E, LINE, CLASSIC, 100)
    assert not rep.precondition_ok and "does not converge" in rep.precondition_note


def test_y_must_lie_in_E():
    E = BoundedSet.cloud([[0.0], [1.0]])
    with pytest.raises(InvalidInput):
        g.remotality_hypothesis_div(g.power_gauge(1), s.constant(0.0), 0.0, 0.5, E, LINE, CLASSIC, 100)


def test_ratio_example_converges():
    E = BoundedSet.cloud([[-1.0], [1.0]])
    probe = s.convergent_probe(0.5, 1.0)
    rep = g.remotality_hypothesis_ratio(g.power_gauge(1), probe, 0.5, -1.0, E, LINE, CLASSIC, 0.5, 2000)
    (z, v), = rep.per_z
    assert z == (1.0,) and v.status is Status.CONVERGES_TO_ZERO
    assert rep.hypothesis_holds and rep.conclusion_holds
    # ratio 1/(n+2) for n >= 2, and 0.5 at n = 1
    assert v.trace.count_at(2000) == 1


def test_constant_probe_at_farthest_point():
    E = BoundedSet.cloud([[0.0], [3.0], [1.0]])
    rep = g.remotality_hypothesis_ratio(g.power_gauge(2), s.constant(0.0), 0.0, 3.0, E, LINE, CLASSIC, 0.1, 200)
    assert rep.hypothesis_holds and rep.conclusion_holds


def test_sign_subtlety_reported():
    E = BoundedSet.cloud([[0.0], [2.0]])
    rep = g.remotality_hypothesis_ratio(g.power_gauge(1), s.constant(0.0), 0.0, 0.0, E, LINE, CLASSIC, 0.5, 200)
    assert rep.hypothesis_holds and not rep.conclusion_holds
    assert rep.conclusion_violated


def test_zero_denominator_counts_as_deviation():
    # x_n = x = 1 sits halfway between y = 0 and z = 2
    E = BoundedSet.cloud([[0.0], [2.0]])
    rep = g.remotality_hypothesis_ratio(g.power_gauge(1), s.constant(1.0), 1.0, 0.0, E, LINE, CLASSIC, 0.5, 100)
    (_, v), = rep.per_z
    assert v.status is Status.DOES_NOT_CONVERGE
    assert rep.guarded == (100,)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_z_equal_y_never_checked(seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-2, 2, size=(int(rng.integers(2, 6)), 2))
    E = BoundedSet.cloud(pts)
    y = pts[int(rng.integers(0, len(pts)))]
    x = rng.uniform(-1, 1, 2)
    rep = g.remotality_hypothesis_div(
        g.power_gauge(1), s.convergent_probe(x, [0.1, 0.0]), x, y, E, NormedSpace(2, 2), CLASSIC, 100, (0.5,)
    )
    assert tuple(y.tolist()) not in [z for z, _ in rep.per_z]
    # the zero sequence never diverges, so including z = y would force a negative
    zero = s.ab_stat_diverges_to_inf(s.constant(0.0), CLASSIC, 100, (0.5,))
    assert not zero.diverges
