import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gmfading import bounds
from gmfading.errors import InvalidParams, NotPsd

from oracles import EXP_TAIL_AT_2, TWO_OVER_E, TWO_OVER_E_POW5


def test_tail_bound_values():
    assert bounds.power_tail_bound(1.0, 1.0, 1) == pytest.approx(TWO_OVER_E, abs=1e-14)
    assert bounds.power_tail_bound(1.0, 1.0, 5) == pytest.approx(TWO_OVER_E_POW5, abs=1e-14)
    # base-2 form evaluated literally
    r = 0.4 / 1.3
    literal = ((1 + r) * 2 ** (-r / np.log(2))) ** 7
    assert bounds.power_tail_bound(1.3, 0.4, 7) == pytest.approx(literal, rel=1e-12)


def test_tail_bound_small_delta_tends_to_one():
    assert bounds.power_tail_bound(1.0, 1e-9, 3) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 10), st.floats(0.01, 10), st.integers(1, 50))
def test_tail_bound_in_unit_interval_and_decreasing(rho, delta, n):
    b = bounds.power_tail_bound(rho, delta, n)
    assert 0.0 <= b <= 1.0
    assert bounds.power_tail_bound(rho, delta, n + 1) <= b
    assert bounds.power_tail_bound(rho, delta * 1.5, n) <= b


def test_tail_bound_validation():
    with pytest.raises(InvalidParams):
        bounds.power_tail_bound(0.0, 1.0, 1)
    with pytest.raises(InvalidParams):
        bounds.power_tail_bound(1.0, 1.0, 0)


def test_empirical_exponential_tail():
    r = bounds.power_tail_empirical(np.eye(1), 1, 1.0, 100_000, 1)
    assert abs(r.empirical - EXP_TAIL_AT_2) <= 3 * np.sqrt(EXP_TAIL_AT_2 * (1 - EXP_TAIL_AT_2) / 1e5)
    assert r.holds


def test_empirical_zero_covariance():
    r = bounds.power_tail_empirical(np.zeros((2, 2)), 3, 1.0, 1000, 2, rho=1.0)
    assert r.empirical == 0.0


def test_empirical_vector_case():
    r = bounds.power_tail_empirical(np.diag([0.5, 0.5]), 2, 1.0, 100_000, 3)
    assert r.empirical <= r.bound


def test_empirical_correlated_covariance_below_trace_budget():
    c = np.array([[0.6, 0.3], [0.3, 0.4]])
    for n in (1, 4):
        r = bounds.power_tail_empirical(c, n, 0.5, 50_000, 4 + n, rho=1.5)
        assert r.empirical <= r.bound


def test_empirical_rejects_bad_input():
    with pytest.raises(NotPsd):
        bounds.power_tail_empirical(np.diag([1.0, -1.0]), 1, 1.0, 10, 0, rho=1.0)
    with pytest.raises(InvalidParams):
        bounds.power_tail_empirical(np.eye(2), 1, 1.0, 10, 0, rho=1.0)


def test_norm_domination_identity():
    assert bounds.norm_domination_margin(np.eye(3)) == pytest.approx(0.0, abs=1e-12)


def test_logdet_split_equality_at_zero():
    A = np.diag([1.0, 2.0, 5.0])
    assert bounds.logdet_split_margin(A, np.zeros((3, 3))) == pytest.approx(0.0, abs=1e-12)


def test_matrix_lemma_suite():
    rep = bounds.check_matrix_lemmas(1000, 6)
    assert rep.passed
    for r in rep.lemmas:
        assert r.trials == 1000 and r.worst_margin >= -1e-9


def test_geometric_examples():
    lower, upper, bound = bounds.geometric_sum_bounds(0.5, 3)
    assert lower == pytest.approx(1.25)
    assert upper == pytest.approx(1.25)
    assert bound == pytest.approx(6.0)
    assert bounds.geometric_sum_bounds(0.3, 1)[:2] == (0.0, 0.0)
    lower, upper, bound = bounds.geometric_sum_bounds(0.9, 100)
    assert max(lower, upper) <= 1000
    assert 900 - 100 <= lower <= 900


@settings(max_examples=60, deadline=None)
@given(st.floats(0.001, 0.999), st.integers(1, 200))
def test_geometric_closed_form(alpha, n):
    lower, upper, bound = bounds.geometric_sum_bounds(alpha, n)
    closed = bounds.geometric_sum_closed_form(alpha, n)
    tol = 1e-9 * max(1.0, closed)
    assert abs(lower - closed) <= tol and abs(upper - closed) <= tol
    assert max(lower, upper) <= bound


def test_geometric_validation():
    with pytest.raises(InvalidParams):
        bounds.geometric_sum_bounds(1.0, 3)
    with pytest.raises(InvalidParams):
        bounds.geometric_sum_bounds(0.5, 0)
