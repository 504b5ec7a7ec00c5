import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entire_growth.errors import TruncationUnavailable
from entire_growth.evaluation import circle_values, eval_log, truncate, truncation_index
from entire_growth.series import ExpSeries, GapSquaresSeries, monomial, parse_function


def _exp_truncation_oracle(r: int, tol: Fraction) -> int:
    """Last kept index under the geometric tail bound, in exact arithmetic."""
    term, best, k = Fraction(1), Fraction(1), 0
    while True:
        k += 1
        term = term * r / k
        q = Fraction(r, k + 1)
        if q < 1 and term / (1 - q) < tol * best:
            return k - 1
        best = max(best, term)


def test_truncation_index_exp_at_ten():
    # frozen from the exact-arithmetic oracle above
    assert _exp_truncation_oracle(10, Fraction(1, 10**12)) == 41
    assert truncation_index(ExpSeries(), math.log(10.0), 1e-12) == 41


@pytest.mark.parametrize("r", [2, 5, 30, 100])
def test_truncation_index_matches_oracle(r):
    assert truncation_index(ExpSeries(), math.log(r), 1e-12) == _exp_truncation_oracle(r, Fraction(1, 10**12))


def test_truncated_tail_is_really_small():
    t = truncate(ExpSeries(), math.log(10.0))
    exact_tail = sum(Fraction(10**k, math.factorial(k)) for k in range(t.N + 1, t.N + 200))
    mu = Fraction(10**10, math.factorial(10))
    assert exact_tail < Fraction(1, 10**12) * mu


def test_polynomial_truncation_is_exact():
    t = truncate(monomial(3, 7), 2.0)
    assert list(t.n) == [7] and t.log_tail == -math.inf


def test_truncation_guards():
    with pytest.raises(TruncationUnavailable):
        truncate(ExpSeries(), 701.0)
    with pytest.raises(TruncationUnavailable):
        truncate(ExpSeries(), 20.0, max_terms=1000)
    with pytest.raises(ValueError):
        truncation_index(ExpSeries(), 1.0, tol=2.0)


def test_terms_are_read_only():
    t = truncate(GapSquaresSeries(), 3.0)
    with pytest.raises(ValueError):
        t.log_term[0] = 0.0


@pytest.mark.parametrize("x", [5.0, 20.0, 60.0])
def test_exp_on_negative_axis_needs_cancellation(x):
    # e^{-x}: terms up to e^x cancel to e^{-x}; recovered in multiprecision
    v = eval_log(ExpSeries(), math.log(x), math.pi)
    assert v.log_mag == pytest.approx(-x, rel=1e-10, abs=1e-10)


def test_cos_sqrt_on_positive_axis_cancellation():
    f = parse_function("cos_sqrt")
    x = 900.0
    v = eval_log(f, math.log(x), 0.0)
    assert v.to_complex().real == pytest.approx(math.cos(30.0), rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=-3.0, max_value=3.0), st.floats(min_value=0.0, max_value=2 * math.pi),
       st.integers(min_value=-3, max_value=3))
def test_periodic_in_theta(log_r, theta, k):
    f = parse_function("baker(a=10)")
    a = eval_log(f, log_r, theta)
    b = eval_log(f, log_r, theta + 2 * math.pi * k)
    assert b.log_mag == pytest.approx(a.log_mag, rel=1e-9, abs=1e-9)


def test_circle_values_matches_closed_form():
    f = ExpSeries()
    th = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    lm, ph, err = circle_values(f, math.log(7.0), th)
    assert np.allclose(lm, 7.0 * np.cos(th), rtol=0, atol=1e-10)
    assert np.all(err < lm)
