import math

import numpy as np
import pytest

from entire_growth.dynamics import (BOUNDED, ESCAPING, INDETERMINATE, Window, baker_segment_check, component_probe,
                                    escape_field, iterate_orbit)
from entire_growth.series import parse_function

Z2 = parse_function("monomial(c=1,n=2)")
BAKER = parse_function("baker(a=10)")
BAKER_LOG = math.log(1e4)


# ---------------------------------------------------------------- single orbits

@pytest.mark.parametrize("z0,cls", [(0.5, "bounded"), (0.9j, "bounded"), (1.0, "bounded"), (2.0, "escaping")])
def test_z2_orbits(z0, cls):
    assert iterate_orbit(Z2, z0).classification == cls


def test_z2_escape_step_from_two():
    # 2^(2^n) first exceeds e^50 with three rising increments behind it
    rec = iterate_orbit(Z2, 2.0)
    assert rec.steps_taken == 7
    assert rec.final_log_mag == pytest.approx(2 ** 7 * math.log(2))


def test_nan_start_is_indeterminate():
    assert iterate_orbit(Z2, complex("nan")).classification == "indeterminate"


def test_constant_is_bounded_everywhere():
    rec = iterate_orbit(parse_function("constant(c=5)"), 3 + 4j)
    assert rec.classification == "bounded"
    assert rec.final_log_mag == pytest.approx(math.log(5))


def test_baker_real_orbit_escapes():
    rec = iterate_orbit(BAKER, 100.0, max_iter=2000, escape_log_threshold=BAKER_LOG,
                        bounded_radius=math.exp(BAKER_LOG - 1))
    assert rec.classification == "escaping"


@pytest.mark.parametrize("z0", [0.5, 0.99, 1.01, 3.0])
def test_escape_survives_larger_budget(z0):
    small = iterate_orbit(Z2, z0, max_iter=50)
    large = iterate_orbit(Z2, z0, max_iter=400)
    if small.classification == "escaping":
        assert large.classification == "escaping" and large.steps_taken == small.steps_taken


def test_budget_validation():
    with pytest.raises(ValueError):
        iterate_orbit(Z2, 0.5, max_iter=0)
    with pytest.raises(ValueError):
        iterate_orbit(Z2, 0.5, escape_log_threshold=1.0, bounded_radius=100.0)


# ---------------------------------------------------------------- windows and fields

def test_window_parse_and_orientation():
    w = Window.parse("-2:2:-1:1")
    assert str(Window.parse(str(w))) == str(w)
    z = w.centers(4, 2)
    assert z.shape == (2, 4)
    assert z[0, 0].imag > 0 > z[1, 0].imag
    assert z[0, 0].real < z[0, -1].real
    with pytest.raises(ValueError):
        Window.parse("1:0:0:1")


def test_z2_field_matches_unit_disc():
    win = Window(-2.0, 2.0, -2.0, 2.0)
    fld = escape_field(Z2, win, (64, 64))
    rad = np.abs(win.centers(64, 64))
    far = np.abs(rad - 1) > 2 * 4 / 64
    assert np.all(fld.classes[far & (rad < 1)] == BOUNDED)
    assert np.all(fld.classes[far & (rad > 1)] == ESCAPING)


def test_parallel_field_identical():
    win = Window(-2.0, 2.0, -2.0, 2.0)
    a = escape_field(Z2, win, (40, 30))
    b = escape_field(Z2, win, (40, 30), workers=3)
    assert np.array_equal(a.classes, b.classes)
    assert np.array_equal(a.steps, b.steps)


def test_constant_field_all_bounded():
    fld = escape_field(parse_function("constant(c=5)"), Window(-10, 10, -10, 10), (16, 16))
    assert fld.counts() == {"bounded": 256, "escaping": 0, "indeterminate": 0}


def test_baker_field_real_axis():
    fld = escape_field(BAKER, Window(0, 400, -50, 50), (256, 64), max_iter=2000,
                       escape_log_threshold=BAKER_LOG, bounded_radius=math.exp(BAKER_LOG - 1))
    row = fld.steps[31]
    assert np.all(fld.classes[31] == ESCAPING)
    # starting further right never escapes later
    assert np.all(np.diff(row) <= 0)


def test_resolution_cap():
    with pytest.raises(ValueError):
        escape_field(Z2, Window(-1, 1, -1, 1), (4096, 4))


def test_pgm_and_csv(tmp_path):
    fld = escape_field(Z2, Window(-2.0, 2.0, -2.0, 2.0), (8, 6))
    fld.to_pgm(tmp_path / "f.pgm")
    lines = (tmp_path / "f.pgm").read_text().splitlines()
    assert lines[:3] == ["P2", "8 6", "255"]
    assert len(lines) == 9
    vals = [int(v) for line in lines[3:] for v in line.split()]
    assert len(vals) == 48 and all(0 <= v <= 255 for v in vals)
    assert set(vals) - {0, 32} and all(v >= 64 for v in vals if v not in (0, 32))

    fld.to_csv(tmp_path / "f.csv")
    rows = (tmp_path / "f.csv").read_text().splitlines()
    assert rows[0] == "x,y,class,steps"
    assert len(rows) == 49
    assert rows[1].split(",")[2] in ("bounded", "escaping", "indeterminate")


# ---------------------------------------------------------------- components

def test_checkerboard_components():
    board = np.where(np.indices((8, 8)).sum(axis=0) % 2 == 0, BOUNDED, ESCAPING)
    rep = component_probe(board, "bounded")
    assert len(rep.components) == 32
    assert all(c.pixels == 1 for c in rep.components)


def test_uniform_field_single_edge_component():
    rep = component_probe(np.full((5, 7), BOUNDED), "bounded")
    assert len(rep.components) == 1
    assert set(rep.components[0].touches) == {"left", "right", "top", "bottom"}
    assert rep.unbounded_flags == [True]


def test_interior_component_not_flagged():
    grid = np.full((7, 7), ESCAPING)
    grid[2:5, 2:5] = BOUNDED
    grid[0, 0] = INDETERMINATE
    rep = component_probe(grid, "bounded")
    assert len(rep.components) == 1 and rep.components[0].pixels == 9
    assert rep.unbounded_flags == [False]
    assert len(component_probe(grid, "escaping").components) == 1


def test_labels_follow_raster_order():
    grid = np.full((4, 4), ESCAPING)
    grid[0, 3] = BOUNDED
    grid[2, 0] = BOUNDED
    comps = component_probe(grid, "bounded").components
    assert [c.bbox[0] for c in comps] == [0, 2]


def test_probe_rejects_unknown_selector():
    with pytest.raises(ValueError):
        component_probe(np.zeros((2, 2)), "indeterminate")


# ---------------------------------------------------------------- Baker segment

def test_baker_segment_large_a():
    rep = baker_segment_check(10.0, 100.0, 16)
    assert rep.passed == 16
    assert rep.pass_fraction == 1.0


def test_baker_segment_small_a_may_fail():
    rep = baker_segment_check(0.1, 0.5, 16)
    assert len(rep.seeds) == 16
    assert rep.passed < 16


def test_baker_segment_validation():
    with pytest.raises(ValueError):
        baker_segment_check(-1.0, 100.0, 4)
