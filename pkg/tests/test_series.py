import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from entire_growth.evaluation import eval_point
from entire_growth.series import (BakerSeries, CosSqrtSeries, ExpSeries, GapSquaresSeries, Polynomial, constant,
                                  load_coefficients_csv, monomial, parse_function)


@pytest.mark.parametrize("ident", ["exp", "cos_sqrt", "gap_squares", "baker(a=10)", "baker(a=0.5)",
                                  "monomial(c=3,n=2)", "constant(c=5)"])
def test_identifier_round_trip(ident):
    f = parse_function(ident)
    assert f.identifier == ident
    assert parse_function(f.identifier).identifier == ident


@pytest.mark.parametrize("bad", ["nope", "exp(a=1)", "monomial(c=3)", "baker(b=1)", "monomial(c=x,n=2)"])
def test_bad_specs(bad):
    with pytest.raises(ValueError):
        parse_function(bad)


def test_log_coefficients_match_exact_fractions():
    n = np.arange(0, 40)
    cases = [
        (ExpSeries(), lambda k: Fraction(1, math.factorial(k))),
        (CosSqrtSeries(), lambda k: Fraction((-1) ** k, math.factorial(2 * k))),
        (GapSquaresSeries(), lambda k: Fraction(1, math.factorial(k)) if k >= 1 and math.isqrt(k) ** 2 == k else 0),
        (BakerSeries(10.0), lambda k: Fraction(11) if k == 0 else Fraction(5, 6) if k == 1
         else Fraction((-1) ** k, math.factorial(2 * k + 1))),
    ]
    for f, oracle in cases:
        la, ph = f.log_abs(n), f.phase(n)
        for k in n:
            exact = Fraction(oracle(int(k)))
            assert f.exact(int(k)) == exact
            if exact == 0:
                assert la[k] == -math.inf
            else:
                assert la[k] == pytest.approx(math.log(abs(exact)), rel=1e-13, abs=1e-13)
                assert math.cos(ph[k]) == pytest.approx(1.0 if exact > 0 else -1.0)


def test_baker_linear_coefficient_is_sinc_plus_one():
    # sin(w)/w = 1 - z/6 + ..., plus z: the linear coefficient is 1 - 1/6
    assert BakerSeries(3.0).exact(1) == Fraction(5, 6)


def test_gap_support():
    g = GapSquaresSeries()
    assert list(g.support(np.arange(5))) == [1, 4, 9, 16, 25]
    assert list(g.support_upto(30)) == [1, 4, 9, 16, 25]


@pytest.mark.parametrize("ident", ["exp", "cos_sqrt", "baker(a=10)", "monomial(c=3,n=2)", "constant(c=5)"])
@pytest.mark.parametrize("z", [0.3 + 0.1j, -2.0 + 0.5j, 4.0 - 3.0j, 11.0 + 0.0j, -7.5 - 0.2j])
def test_series_matches_closed_form(ident, z):
    f = parse_function(ident)
    want = complex(f.closed_form(np.array([z]))[0])
    got = eval_point(f, z).to_complex()
    assert abs(got - want) <= 1e-11 * max(1.0, abs(want))


def test_cos_sqrt_closed_form_branch_free():
    f = CosSqrtSeries()
    z = np.array([-4.0 + 1e-14j, -4.0 - 1e-14j])
    v = f.closed_form(z)
    assert v[0] == pytest.approx(v[1]) == pytest.approx(math.cosh(2.0))


def test_polynomial_properties():
    p = monomial(3, 2)
    assert p.degree == 2 and p.support_size == 1 and not p.transcendental
    assert constant(5).degree == 0
    with pytest.raises(ValueError):
        Polynomial([0, 0])


def test_csv_loading(tmp_path):
    a = tmp_path / "a.csv"
    a.write_text("k,re_ak,im_ak\n0,1,0\n3,0,2\n")
    p = load_coefficients_csv(a)
    assert p.degree == 3
    assert p.closed_form(np.array([1.0]))[0] == pytest.approx(1 + 2j)
    b = tmp_path / "b.csv"
    b.write_text(f"k,log_mag,phase\n2,{math.log(4)},{math.pi / 2}\n")
    q = parse_function(f"csv:{b}")
    assert q.closed_form(np.array([1.0]))[0] == pytest.approx(cmath.rect(4, math.pi / 2))
    c = tmp_path / "c.csv"
    c.write_text("k,x\n0,1\n")
    with pytest.raises(ValueError):
        load_coefficients_csv(c)
