import math

import numpy as np
import pytest

from entire_growth.errors import InsufficientExponents
from entire_growth.gaps import (CONSISTENT, FAILS, HOLDS, INCONCLUSIVE, VIOLATES, exponent_sequence, fabry_check,
                                fejer_check, gap_report, hypothesis_check, hypothesis_from_profile,
                                log_density_curve)
from entire_growth.invariants import Grid, GrowthProfile, GrowthSample
from entire_growth.series import parse_function


def test_exponent_sequences():
    assert exponent_sequence(parse_function("gap_squares"), 30) == [1, 4, 9, 16, 25]
    assert exponent_sequence(parse_function("monomial(c=3,n=2)"), 30) == [2]
    assert exponent_sequence(parse_function("exp"), 5) == [0, 1, 2, 3, 4, 5]


def test_fabry_and_fejer_on_squares():
    e = [k * k for k in range(1, 21)]
    fab = fabry_check(e)
    assert fab.verdict == HOLDS and fab.ratios == [float(k) for k in range(1, 21)]
    fej = fejer_check(e)
    assert fej.verdict == HOLDS and fej.decay_exponent == pytest.approx(2.0)
    assert fej.partial_sums[-1] == pytest.approx(sum(1 / k**2 for k in range(1, 21)))


def test_full_sequence_fails_both():
    e = list(range(0, 200))
    assert fabry_check(e).verdict == FAILS
    assert fejer_check(e).verdict == FAILS


def test_in_between_is_inconclusive():
    e = [int(k ** 1.3) + k for k in range(1, 60)]
    assert fejer_check(e).verdict == INCONCLUSIVE


def test_too_few_exponents():
    with pytest.raises(InsufficientExponents):
        fabry_check([0, 2])
    rep = gap_report(parse_function("monomial(c=3,n=2)"))
    assert rep.fabry_verdict == INCONCLUSIVE


def test_log_density_trapezoid():
    x = np.linspace(0.0, 4.0, 5)
    # E = [0, 2]: flags at 0,1,2; the trapezoid gives the half step at the edge
    d = log_density_curve(x, [1, 1, 1, 0, 0])
    assert d == pytest.approx([1.0, 1.0, 1.0, 2.5 / 3, 2.5 / 4])


def _synthetic(log_L_of):
    g = Grid(0.0, 4.0, 41)
    samples = [GrowthSample(float(x), 2.0 + x, log_L_of(x), 0.0, 1) for x in g.log_r]
    return GrowthProfile(g, samples, "synthetic")


def test_hypothesis_verdicts_on_synthetic_profiles():
    assert hypothesis_from_profile(_synthetic(lambda x: -x), 0.5).verdict == VIOLATES
    assert hypothesis_from_profile(_synthetic(lambda x: 2.0 + x), 0.5).verdict == CONSISTENT
    # exceptional set confined to an early stretch: density decays
    rep = hypothesis_from_profile(_synthetic(lambda x: -1.0 if x < 0.5 else 2.0 + x), 0.5)
    assert rep.verdict == CONSISTENT and 0 < rep.final_density < 0.3


def test_invalid_and_excluded_samples():
    g = Grid(0.0, 1.0, 3)
    prof = GrowthProfile(g, [GrowthSample(0.0, -1.0, -2.0, 0.0, 0),
                             GrowthSample(0.5, math.nan, math.nan, math.nan, -1, False, "x"),
                             GrowthSample(1.0, 2.0, 2.0, 0.0, 1)])
    rep = hypothesis_from_profile(prof, 0.1)
    assert rep.excluded == [True, False, False]
    assert rep.exceptional == [False, True, False]
    assert any("failed to evaluate" in n for n in rep.notes)
    with pytest.raises(ValueError):
        hypothesis_from_profile(prof, 1.5)


def test_monomial_density_zero():
    rep = hypothesis_check(parse_function("monomial(c=3,n=2)"), 0.1, Grid(1.0, 5.0, 32))
    assert rep.final_density == 0.0


def test_gap_squares_density_stable_under_refinement():
    f = parse_function("gap_squares")
    a = hypothesis_check(f, 0.1, Grid(0.0, 10.0, 160))
    b = hypothesis_check(f, 0.1, Grid(0.0, 10.0, 320))
    assert a.verdict == b.verdict == CONSISTENT
    assert abs(a.final_density - b.final_density) < 0.05


def test_hypothesis_csv(tmp_path):
    rep = hypothesis_check(parse_function("monomial(c=3,n=2)"), 0.1, Grid(1.0, 2.0, 4))
    p = tmp_path / "h.csv"
    rep.to_csv(p)
    assert p.read_text().splitlines()[0] == "log_r,exceptional"
    assert rep.to_dict()["flags"] == [0, 0, 0, 0]
