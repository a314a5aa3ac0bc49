"""Finite-difference conformal modules and decomposition checks."""
import math

import pytest

from hypgauge.domains import comb_quadrilateral
from hypgauge.errors import DomainError, GridTooCoarse, NonRectilinear, PreconditionNotMet
from hypgauge.exact import log_rectangle_module
from hypgauge.modules import (QuadSpec, Side, Wall, decomposition_residual, serial_rule_check,
                              solve_module, symmetric_split_check, telescoping_check)
from hypgauge.modules import _grid_module

PI = math.pi


# --- solve_module examples -------------------------------------------------

def test_unit_square_module_one():
    q = QuadSpec.from_markers(0, 0, 1, 1, [0j, 1 + 0j, 1 + 1j, 1j])
    est = solve_module(q, 1 / 16)
    assert est.value == pytest.approx(1.0, abs=1e-3)
    assert est.error_bound >= 0 and est.grid_h == 1 / 16


def test_rectangle_short_sides_module_two():
    # 1 x 2 measured between the two short sides
    q = QuadSpec.rectangle(2.0, 1.0)
    assert solve_module(q, 1 / 16).value == pytest.approx(2.0, abs=2e-3)


def test_log_rectangle_module_three():
    q = QuadSpec.rectangle(1.5 * PI, 0.5 * PI)
    est = solve_module(q, PI / 32)
    exact = log_rectangle_module(1.0, math.exp(1.5 * PI), PI / 2)
    assert exact == pytest.approx(3.0, rel=1e-14)
    assert est.value == pytest.approx(exact, abs=3e-3)


def test_loads_dumps_roundtrip():
    c = comb_quadrilateral(1).quad
    assert QuadSpec.loads(c.dumps(), label=c.label) == c


# --- errors ------------------------------------------------------------------

def test_non_rectilinear_side():
    with pytest.raises(NonRectilinear):
        Side(0, 1 + 1j)


def test_grid_too_coarse_short_tooth():
    q = QuadSpec(0, 0, 4, 1, (Wall("v", 2.0, 0.75, 1.0),), (Side(0, 1j),), (Side(4, 4 + 1j),))
    with pytest.raises(GridTooCoarse):
        solve_module(q, 1 / 8)          # tooth of length 1/4 is 2 cells
    assert solve_module(q, 1 / 16).value > 4.0


def test_grid_too_coarse_off_grid():
    q = QuadSpec.rectangle(1.0, 0.3)
    with pytest.raises(GridTooCoarse):
        solve_module(q, 1 / 8)


def test_bad_markers():
    with pytest.raises(DomainError):
        QuadSpec.from_markers(0, 0, 1, 1, [0j, 0j, 1 + 1j, 1j])
    with pytest.raises(DomainError):
        QuadSpec.from_markers(0, 0, 1, 1, [0j, 1j, 1 + 1j, 1 + 0j])


# --- invariants --------------------------------------------------------------

QUADS = [
    QuadSpec.rectangle(2.0, 1.0),
    QuadSpec.from_markers(0, 0, 3, 1, [0.3 + 0j, 2.0 + 0j, 2.8 + 1j, 1.1 + 1j]),
    QuadSpec(0, 0, 4, 1, (Wall("v", 2.0, 0.5, 1.0),), (Side(0, 1j),), (Side(4, 4 + 1j),)),
    comb_quadrilateral(1).quad,
]


@pytest.mark.parametrize("q", QUADS, ids=["rect", "markers", "tooth", "comb1"])
def test_reciprocal_duality(q):
    h = PI / 32 if q.label.startswith("comb") else 1 / 20
    m, mt = solve_module(q, h), solve_module(q.conjugate(), h)
    rel = m.error_bound / m.value + mt.error_bound / mt.value
    assert m.value * mt.value == pytest.approx(1.0, abs=2 * rel + 1e-9)


def test_swapping_a_and_b_keeps_module():
    q = QUADS[1]
    assert solve_module(q.swapped(), 1 / 20).value == pytest.approx(solve_module(q, 1 / 20).value,
                                                                      rel=1e-9)


def test_conjugate_of_rectangle():
    c = QuadSpec.rectangle(2.0, 1.0).conjugate()
    assert {s.a.imag for s in c.side_a + c.side_b} == {0.0, 1.0}
    assert solve_module(c, 1 / 16).value == pytest.approx(0.5, abs=1e-6)


def test_grid_convergence_second_order():
    q = QuadSpec.from_markers(0, 0, 3, 1, [0.3 + 0j, 2.0 + 0j, 2.9 + 1j, 1.1 + 1j])
    v = [_grid_module(q, h)[0] for h in (1 / 10, 1 / 20, 1 / 40, 1 / 80)]
    diffs = [abs(b - a) for a, b in zip(v, v[1:])]
    for d0, d1 in zip(diffs, diffs[1:]):
        assert d0 / d1 >= 3.0


@pytest.mark.parametrize("shrink", [0.1, 0.4, 0.8])
def test_shortening_measured_sides_does_not_decrease_module(shrink):
    # fewer connecting curves -> larger extremal length
    base = QuadSpec.from_markers(0, 0, 3, 1, [0.2 + 0j, 2.0 + 0j, 2.9 + 1j, 1.0 + 1j])
    short = QuadSpec.from_markers(0, 0, 3, 1, [0.2 + shrink, 2.0 + 0j, 2.9 + 1j, 1.0 + shrink + 1j])
    h = 1 / 20
    m0, m1 = solve_module(base, h), solve_module(short, h)
    assert m1.value >= m0.value - (m0.error_bound + m1.error_bound)
    assert m1.value > m0.value


# --- serial rule ---------------------------------------------------------------

def test_serial_rule_straight_split_exact():
    whole = solve_module(QuadSpec.rectangle(2.0, 1.0), 1 / 16)
    sq = QuadSpec(0, 0, 2, 1, (), (Side(0, 1j),), (Side(1, 1 + 1j),))
    sq2 = QuadSpec(0, 0, 2, 1, (), (Side(1, 1 + 1j),), (Side(2, 2 + 1j),))
    chk = serial_rule_check(whole, [solve_module(sq, 1 / 16), solve_module(sq2, 1 / 16)])
    assert abs(chk.residual) <= 4e-3
    assert chk.passed


def test_serial_rule_comb_tooth():
    c = comb_quadrilateral(1)
    h = PI / 32
    whole = solve_module(c.quad, h)
    g = c.gammas[0]
    parts = [solve_module(c.quad.with_sides(c.quad.side_a, (g,)), h),
             solve_module(c.quad.with_sides((g,), c.quad.side_b), h)]
    chk = serial_rule_check(whole, parts)
    assert chk.passed and chk.residual >= -chk.tolerance


def test_serial_rule_single_part():
    whole = solve_module(QuadSpec.rectangle(2.0, 1.0), 1 / 16)
    chk = serial_rule_check(whole, [whole])
    assert chk.residual == 0.0 and chk.passed


# --- two-cut decomposition ------------------------------------------------------

def test_decomposition_straight_rectangle():
    q = QuadSpec.rectangle(8.0, 1.0)
    chk = decomposition_residual(q, Side(2, 2 + 1j), Side(6, 6 + 1j), 1 / 8)
    assert chk.modules["Q2"].value == pytest.approx(4.0, abs=1e-6)
    assert abs(chk.residual) <= chk.slack
    assert chk.passed


def test_decomposition_comb_one_tooth():
    c = comb_quadrilateral(1)
    chk = decomposition_residual(c.quad, c.ells[0], c.gammas[0], PI / 32)
    assert chk.modules["Q2"].value == pytest.approx(4.0, abs=1e-3)
    assert chk.bound == pytest.approx(8.82 * math.exp(-PI * chk.modules["Q2"].value), rel=1e-12)
    assert abs(chk.residual) <= 8.82 * math.exp(-4 * PI) + chk.slack
    assert chk.passed


def test_decomposition_precondition():
    q = QuadSpec.rectangle(4.0, 1.0)
    with pytest.raises(PreconditionNotMet):
        decomposition_residual(q, Side(1, 1 + 1j), Side(3, 3 + 1j), 1 / 8)


def test_symmetric_tooth_one_sided():
    # reflection-symmetric about x = 5; tooth hangs from the top, cut spans the gap below it
    q = QuadSpec(0, 0, 10, 1, (Wall("v", 5.0, 0.5, 1.0),), (Side(0, 1j),), (Side(10, 10 + 1j),))
    chk = symmetric_split_check(q, Side(5, 5 + 0.5j), (Side(3, 3 + 1j), Side(7, 7 + 1j)), 1 / 16)
    assert chk.modules["Q2"].value >= 3
    assert chk.modules["left"].value == pytest.approx(chk.modules["right"].value, rel=1e-8)
    assert -chk.slack <= chk.residual <= chk.bound + chk.slack
    assert chk.passed


# --- telescoping -----------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2])
def test_telescoping_comb(n):
    c = comb_quadrilateral(n)
    assert c.r_modules == tuple(float(2 ** (j + 1)) for j in range(1, n + 1))
    rep = telescoping_check(c.quad, c.gammas, c.r_modules, PI / 32)
    assert len(rep.parts) == n + 1
    assert -rep.slack <= rep.residual <= rep.bound + rep.slack
    assert rep.passed


def test_telescoping_without_teeth_is_exact():
    c = comb_quadrilateral(0)
    assert not c.quad.walls
    rep = telescoping_check(c.quad, [Side(2 * PI, 2 * PI + 0.5j * PI)], [], PI / 32)
    assert abs(rep.residual) <= rep.slack
    assert rep.end_to_end.value == pytest.approx(8.0, abs=1e-6)
