import math

import pytest

from entire_growth.errors import (FitRejected, NotFound, NotSatisfiedOnGrid, SeedTooSmall,
                                  TruncationUnavailable, UndefinedForZeroLowerOrder)
from entire_growth.invariants import Grid, growth_exponents, growth_profile, max_modulus, min_modulus
from entire_growth.sequences import (EXACT, FITTED, HALF, QUARTER, GrowthCurve, build_sequences, circle_triple,
                                     find_sigma_step1, fit_growth_curve, lemma1_construct, special_case_seeds,
                                     verify_conclusion_ineq, verify_lemma2, verify_step2ii, verify_wiman_valiron)
from entire_growth.series import parse_function
from entire_growth.towers import Tower

EXP = parse_function("exp")
GAP = parse_function("gap_squares")


def _fit(ident):
    f = parse_function(ident)
    return fit_growth_curve(f, growth_profile(f, Grid(2.0, 6.0, 32), with_min=False))


# ---------------------------------------------------------------- growth curves

def test_fit_exp_recovers_unit_order_and_type():
    c = _fit("exp")
    assert c.mode == FITTED
    assert c.rho_hat == pytest.approx(1.0, abs=1e-9)
    assert c.sigma_hat == pytest.approx(1.0, abs=1e-9)


def test_fit_cos_sqrt_is_near_half():
    c = _fit("cos_sqrt")
    assert abs(c.rho_hat - 0.5) < 0.05
    assert c.overlap_max_dev <= c.overlap_tol


def test_fit_rejects_polynomial():
    with pytest.raises(FitRejected):
        _fit("monomial(c=3,n=2)")


def test_model_rejects_nonpositive_exponent():
    with pytest.raises(FitRejected):
        GrowthCurve.model(0.0, 0.0)


def test_exact_curve_respects_ceiling():
    c = GrowthCurve.exact(EXP, ceiling=10.0)
    assert c(5.0).to_float() == pytest.approx(math.exp(5.0))
    with pytest.raises(TruncationUnavailable):
        c(11.0)


# ---------------------------------------------------------------- sequences

def test_sequences_exp_model_recurrence():
    pair = build_sequences(GrowthCurve.model(0.0, 1.0), 2.0, 256.0, 2.0, 4, HALF)
    assert pair.log_R[1] == Tower(0, math.exp(64.0))
    assert pair.log_S[1].value == pytest.approx(math.exp(2.0), rel=1e-14)
    assert all(pair.property2)
    assert pair.verified and pair.n1 == 1


def test_sequences_grow_into_towers():
    pair = build_sequences(GrowthCurve.model(0.0, 1.0), 2.0, 256.0, 2.0, 6, HALF)
    assert pair.log_R[-1].level >= 1
    assert all(a < b for a, b in zip(pair.log_R, pair.log_R[1:]))


def test_seed_below_fixed_point():
    with pytest.raises(SeedTooSmall):
        build_sequences(GrowthCurve.model(0.0, 1.0), 2.0, 4.0, 1.0, 4, HALF)


@pytest.mark.parametrize("kw", [dict(alpha=1.0), dict(log_R1=-1.0), dict(n_max=0), dict(variant="third")])
def test_sequences_input_validation(kw):
    args = dict(alpha=2.0, log_R1=256.0, log_S1=2.0, n_max=4, variant=HALF)
    args.update(kw)
    with pytest.raises(ValueError):
        build_sequences(GrowthCurve.model(0.0, 1.0), **args)


def test_exact_curve_stops_with_note():
    pair = build_sequences(GrowthCurve.exact(EXP), 2.0, 40.0, 1.0, 6, HALF)
    assert len(pair.log_R) < 6
    assert pair.notes


# ---------------------------------------------------------------- Wiman-Valiron constants

@pytest.mark.parametrize("ident", ["exp", "cos_sqrt", "gap_squares"])
def test_wiman_valiron_constants(ident):
    wv = verify_wiman_valiron(parse_function(ident), Grid(1.0, 3.0, 21))
    assert wv.K >= 2
    assert wv.log_K2 == pytest.approx(2 * math.log(2) + wv.K)
    assert wv.log_s0 is not None and wv.log_s1 is not None


def test_wiman_valiron_beyond_ceiling():
    with pytest.raises(TruncationUnavailable):
        verify_wiman_valiron(EXP, Grid(1.0, 300.0, 5))


# ---------------------------------------------------------------- u log u inequality

def test_lemma2_exp_oracle_row():
    res = verify_lemma2(EXP, 2.0, Grid(8.0, 9.0, 2))
    row = res["rows"][0]
    assert row["log_r"] == 8.0
    # u = e^2: log M(u log u) = 2 e^2, right side 2 (e^2/4 + 2 - log 4)
    assert row["lhs"] == pytest.approx(2 * math.exp(2), rel=1e-9)
    assert row["rhs"] == pytest.approx(2 * (math.exp(2) / 4 + 2 - math.log(4)), rel=1e-9)
    assert row["holds"]


def test_lemma2_fails_for_steep_polynomial_near_one():
    with pytest.raises(NotSatisfiedOnGrid):
        verify_lemma2(parse_function("monomial(c=1,n=100)"), 2.0, Grid(0.04, 0.4, 10))


def test_lemma2_rejects_small_m():
    with pytest.raises(ValueError):
        verify_lemma2(EXP, 1.0, Grid(2.0, 4.0, 3))


# ---------------------------------------------------------------- l_n, k_n

def _quarter_pair(f):
    return build_sequences(GrowthCurve.exact(f), 2.0, 40.0, 1.0, 2, QUARTER)


def test_lemma1_keeps_k_below_a():
    records, _ = lemma1_construct(GAP, _quarter_pair(GAP), 100.0)
    assert records
    for r in records:
        assert r.k_n <= r.a_n
        assert r.k_n <= r.l_n + 1e-12


def test_lemma1_saturates_when_a_is_large():
    f = parse_function("constant(c=5)")
    pair = build_sequences(GrowthCurve.model(0.0, 1.0), 2.0, 40.0, 1.0, 3, QUARTER)
    records, _ = lemma1_construct(f, pair, 100.0)
    for r in records:
        assert r.a_n == math.inf
        assert r.k_n == r.l_n
        # (8 S_n)^{2 k_n} = b exactly when k_n = l_n
        assert 2 * r.k_n * (math.log(8) + r.log_S) == pytest.approx(math.log(100.0))
    out = verify_conclusion_ineq(f, records, 2.0)
    assert out["n1"] == 1


def test_lemma1_guards():
    pair = _quarter_pair(GAP)
    with pytest.raises(ValueError):
        lemma1_construct(GAP, pair, 1.0)
    half = build_sequences(GrowthCurve.exact(GAP), 2.0, 40.0, 1.0, 2, HALF)
    with pytest.raises(ValueError):
        lemma1_construct(GAP, half, 100.0)


# ---------------------------------------------------------------- sigma and the power inequality

def test_sigma_polynomial_is_immediate():
    assert find_sigma_step1(parse_function("monomial(c=3,n=2)"), 1.5, 2.0) == 1.5


def test_sigma_exp_not_found():
    with pytest.raises(NotFound):
        find_sigma_step1(EXP, 1.0, 2.0)


@pytest.mark.parametrize("log_r", [2.0, 3.0])
def test_sigma_gap_squares_matches(log_r):
    s = find_sigma_step1(GAP, log_r, 2.0)
    assert log_r <= s <= 2 * log_r
    assert abs(min_modulus(GAP, s) - max_modulus(GAP, log_r)) <= 1e-6


def test_sigma_rejects_small_radius():
    with pytest.raises(ValueError):
        find_sigma_step1(GAP, 0.0, 2.0)


def test_power_inequality_exp_threshold():
    res = verify_step2ii(EXP, 2.0, Grid(0.05, 1.0, 400))
    # r^4 >= 4 r  iff  r >= 4^{1/3}
    assert 4 ** (1 / 3) <= math.exp(res["first_log_r"]) <= 4 ** (1 / 3) * math.exp(1 / 399)


def test_power_inequality_small_polynomial_holds_and_large_fails():
    assert verify_step2ii(parse_function("monomial(c=0.5,n=2)"), 2.0, Grid(0.5, 2.0, 8))["first_log_r"] == 0.5
    for ident in ("monomial(c=3,n=2)", "constant(c=5)"):
        with pytest.raises(NotSatisfiedOnGrid):
            verify_step2ii(parse_function(ident), 2.0, Grid(0.5, 2.0, 8))


# ---------------------------------------------------------------- circles and special-case seeds

def test_circle_triple_outer_radius():
    curve = GrowthCurve.model(0.0, 1.0)
    pair = build_sequences(curve, 2.0, 256.0, 2.0, 4, HALF)
    tri = circle_triple(pair, curve, 1)
    assert tri.log_T2.level == 0
    assert tri.log_T2.value == pytest.approx(2 * (64 + math.log(256) - math.log(4)), rel=1e-12)
    assert tri.T1_mode == "model-estimate"
    assert tri.ordered
    with pytest.raises(IndexError):
        circle_triple(pair, curve, 9)


def test_circle_triple_exact_inner_radius():
    curve = GrowthCurve.exact(GAP)
    pair = build_sequences(curve, 2.0, 12.0, 1.0, 1, HALF)
    tri = circle_triple(pair, curve, 1, f=GAP, exact_cap=40.0)
    assert tri.T1_mode in (EXACT, "order-one-estimate")


@pytest.mark.parametrize("ident", ["exp", "cos_sqrt"])
def test_special_case_index(ident):
    f = parse_function(ident)
    ex = growth_exponents(growth_profile(f, Grid(2.0, 6.0, 32), with_min=False))
    assert special_case_seeds(ex, 2.0)["n_lambda_rho"] == 2


def test_special_case_undefined_for_polynomial():
    f = parse_function("monomial(c=3,n=2)")
    ex = growth_exponents(growth_profile(f, Grid(2.0, 6.0, 32), with_min=False))
    with pytest.raises(UndefinedForZeroLowerOrder):
        special_case_seeds(ex, 2.0)
