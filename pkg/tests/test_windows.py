import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from remotal_lab import windows as w
from remotal_lab.errors import CertificateMismatch, HorizonExceeded, InvalidInput, InvalidWindowPair
from remotal_lab.windows import Status


SQ = w.poly_window(b_exp=2)


def multiples_of(m):
    return w.from_membership(lambda k: k % m == 0, f"mult{m}")


# -- validation --------------------------------------------------------------

def test_classical_pair_validates():
    rep = w.validate_window_pair(w.classical_pair(), 100)
    assert rep.ok and rep.first_p1_violation is None


def test_square_pair_validates():
    assert w.validate_window_pair(SQ, 100).ok


def test_constant_length_fails_p3():
    pair = w.WindowPair(lambda n: n, lambda n: n, "[n,n]")
    rep = w.validate_window_pair(pair, 10)
    assert rep.p1 and rep.p2 and not rep.p3
    assert rep.first_p3_violation == 10


def test_p1_and_p2_violation_indices():
    dip = w.WindowPair(lambda n: 5.0 if n == 3 else 10.0 * n, lambda n: 20.0 * n, "dip")
    rep = w.validate_window_pair(dip, 20)
    assert not rep.p1 and rep.first_p1_violation == 3
    crossed = w.WindowPair(lambda n: 2.0 * n, lambda n: 2.0 * n if n < 4 else 1.5 * n, "cross")
    rep = w.validate_window_pair(crossed, 20)
    assert not rep.p2 and rep.first_p2_violation == 4


def test_non_finite_bound_names_index():
    bad = w.WindowPair(lambda n: 1.0, lambda n: math.inf if n == 7 else float(n), "bad")
    with pytest.raises(InvalidInput, match="n=7"):
        w.validate_window_pair(bad, 10)


def test_density_trace_rejects_invalid_pair():
    pair = w.WindowPair(lambda n: n, lambda n: n, "[n,n]")
    with pytest.raises(InvalidWindowPair):
        w.density_trace(w.perfect_squares(), pair, 10)


# -- counting ---------------------------------------------------------------

def test_powers_of_two_in_first_hundred():
    assert w.window_count(w.powers_of_two(), w.classical_pair(), 100) == 6
    assert not w.powers_of_two()(1)


@pytest.mark.parametrize("n", [1, 2, 7, 31, 100])
def test_squares_in_square_window(n):
    assert w.window_count(w.perfect_squares(), SQ, n) == n


def test_never_counts_zero():
    assert w.window_count(w.never(), SQ, 50) == 0


def test_fractional_bounds_use_ceil_and_floor():
    pair = w.WindowPair(lambda n: n + 0.5, lambda n: 3.0 * n + 0.25, "frac")
    assert pair.integer_range(4) == (5, 12)
    assert w.window_count(w.always(), pair, 4) == 8


def test_horizon_exceeded_without_certificate():
    with pytest.raises(HorizonExceeded):
        w.window_count(multiples_of(3), SQ, 50, cap=1000)


def test_certificate_bypasses_cap():
    # [1, 10**12]: only the closed form can answer
    assert w.window_count(w.perfect_squares(), SQ, 10**6, cap=1000) == 10**6


def test_certificate_mismatch_detected():
    liar = w.IndexPredicate(w.perfect_squares().mask, lambda lo, hi: 0, "liar")
    with pytest.raises(CertificateMismatch):
        w.window_count(liar, SQ, 10)


def test_cap_env_override(monkeypatch):
    monkeypatch.setenv("REMOTAL_LAB_CAP", "500")
    assert w.enumeration_cap() == 500
    with pytest.raises(HorizonExceeded):
        w.window_count(multiples_of(3), SQ, 30)


@settings(max_examples=200, deadline=None)
@given(lo=st.integers(-5, 3000), span=st.integers(-3, 3000))
def test_certificates_match_enumeration(lo, span):
    hi = lo + span
    for pred, member in ((w.powers_of_two(), oracles.is_power_of_two), (w.perfect_squares(), oracles.is_square)):
        expected = oracles.window_count(member, lo, hi)
        assert pred.count(max(lo, 1), hi) == expected
        assert pred.negate().count(max(lo, 1), hi) == oracles.window_count(lambda k: not member(k), lo, hi)


# -- density traces ---------------------------------------------------------

def test_powers_of_two_square_window_at_100():
    tr = w.density_trace(w.powers_of_two(), SQ, 100)
    assert tr.count_at(100) == 13
    assert tr.density_at(100) == 13 / 10000


def test_squares_density_is_reciprocal():
    tr = w.density_trace(w.perfect_squares(), SQ, 300)
    assert all(d == 1 / n for n, d in tr.values)
    assert tr.certified


def test_always_density_is_one():
    for pair in (w.classical_pair(), SQ, w.linear_window(1, 3)):
        tr = w.density_trace(w.always(), pair, 50)
        assert np.all(tr.densities == 1.0)


PAIRS = [
    (w.classical_pair(), lambda n: 1.0, lambda n: float(n)),
    (SQ, lambda n: 1.0, lambda n: float(n) ** 2),
    (w.linear_window(1, 2), lambda n: float(n), lambda n: 2.0 * n),
    (w.shifted_poly(3, 2), lambda n: float(n) ** 3, lambda n: float(n) ** 3 + float(n) ** 2),
]


@pytest.mark.parametrize("pair,alpha,beta", PAIRS, ids=lambda p: getattr(p, "label", ""))
@pytest.mark.parametrize("pred,member", [
    (w.powers_of_two(), oracles.is_power_of_two),
    (w.perfect_squares(), oracles.is_square),
    (multiples_of(3), lambda k: k % 3 == 0),
])
def test_density_trace_matches_oracle(pair, alpha, beta, pred, member):
    horizon = 40
    tr = w.density_trace(pred, pair, horizon, validate=False)
    assert tr.densities.tolist() == oracles.density_series(member, alpha, beta, horizon)


def test_verify_mode_checks_every_window():
    tr = w.density_trace(w.powers_of_two(), SQ, 60, verify=True)
    assert tr.count_at(60) == oracles.window_count(oracles.is_power_of_two, 1, 3600)


@settings(max_examples=30, deadline=None)
@given(m=st.integers(2, 9), horizon=st.integers(5, 60))
def test_complement_identity(m, horizon):
    for pair in (w.classical_pair(), SQ):
        a = w.density_trace(multiples_of(m), pair, horizon, validate=False)
        b = w.density_trace(multiples_of(m).negate(), pair, horizon, validate=False)
        assert np.allclose(a.densities + b.densities, 1.0, rtol=0, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(m=st.integers(1, 6), horizon=st.integers(5, 60))
def test_monotone_in_the_set(m, horizon):
    # multiples of 2m form a subset of multiples of m
    small = w.density_trace(multiples_of(2 * m), SQ, horizon, validate=False)
    big = w.density_trace(multiples_of(m), SQ, horizon, validate=False)
    assert np.all(small.densities <= big.densities)


@settings(max_examples=30, deadline=None)
@given(m=st.integers(1, 7), horizon=st.integers(2, 200))
def test_classical_specialization(m, horizon):
    tr = w.density_trace(multiples_of(m), w.classical_pair(), horizon, validate=False)
    assert tr.densities.tolist() == [(n // m) / n for n in range(1, horizon + 1)]


def test_csv_columns_and_rendering():
    tr = w.density_trace(w.perfect_squares(), SQ, 3, validate=False)
    assert tr.to_csv().splitlines() == [
        "n,alpha,beta,count,density",
        "1,1,1,1,1",
        "2,1,4,2,0.5",
        "3,1,9,3,0.3333333333333333",
    ]


# -- verdicts ---------------------------------------------------------------

def test_powers_of_two_verdict_converges():
    tr = w.density_trace(w.powers_of_two(), SQ, 200)
    assert w.verdict_converges_to_zero(tr, 0.01, 50).status is Status.CONVERGES_TO_ZERO


def test_constant_one_does_not_converge():
    tr = w.density_trace(w.always(), w.classical_pair(), 100)
    v = w.verdict_converges_to_zero(tr, 0.5)
    assert v.status is Status.DOES_NOT_CONVERGE and not v.converges


def test_squares_short_horizon_inconclusive():
    tr = w.density_trace(w.perfect_squares(), SQ, 10)
    assert w.verdict_converges_to_zero(tr, 0.05, 8).status is Status.INCONCLUSIVE


def test_rising_tail_is_not_convergent():
    vals = [0.001] * 10 + [0.002 * k for k in range(1, 5)]
    assert w.verdict_from_values(vals, 0.01, 4).status is Status.INCONCLUSIVE


def test_empty_values_rejected():
    with pytest.raises(InvalidInput):
        w.verdict_from_values([], 0.01, 1)


def test_verdict_statuses_serialise():
    assert [s.value for s in Status] == ["ConvergesToZero", "DoesNotConverge", "Inconclusive"]
