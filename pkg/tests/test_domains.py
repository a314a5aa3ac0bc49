"""Constructors for the ray fan, the gapped sector, the comb and the standard domains."""
import math

import numpy as np
import pytest

from hypgauge.domains import (Example1Params, Example2Params, build_domain, comb_quadrilateral,
                              component_count, example1_domain, example2_alpha, example2_domain,
                              example2_forward_gates, example2_reverse_gates, parse_domain,
                              sector_domain, slit_disk, strip_domain)
from hypgauge.errors import DepthTooLarge, DomainError
from hypgauge.exact import bn_lower_bound
from hypgauge.geometry import (ArcSlit, Circle, Inside, RadialRay, SectorWall, Segment,
                               circle_components, distance_to_boundary, locate)
from hypgauge.modules import QuadSpec, solve_module

PI = math.pi


def _rays(dom, r):
    return sorted(p.angle for p in dom.pieces if isinstance(p, RadialRay) and p.r_start == r)


# --- example 1 ------------------------------------------------------------------

def test_example1_generation0_rays():
    assert _rays(example1_domain(), 1.0) == pytest.approx([0, PI / 2, PI, 3 * PI / 2])


def test_example1_generation1_rays():
    ang = _rays(example1_domain(), math.exp(4 * PI))
    assert ang == pytest.approx([(PI / 2) * (0.5 + k) for k in range(4)])


def test_example1_ray_counts_per_generation():
    dom = example1_domain(Example1Params(3))
    for l in range(1, 4):
        assert len(_rays(dom, math.exp(4 * PI * l))) == 2 ** (l + 1)


def test_example1_basepoint_distance():
    dom = example1_domain()
    assert dom.basepoint == 0j
    assert distance_to_boundary(0j, dom) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("alpha, count", [(0.5, 1), (1.5, 4), (math.exp(9 * PI), 16)])
def test_component_count_table(alpha, count):
    assert component_count(Example1Params(3), alpha) == count


def test_component_count_beyond_depth():
    with pytest.raises(DepthTooLarge):
        component_count(Example1Params(1), math.exp(8.5 * PI))
    with pytest.raises(DomainError):
        component_count(Example1Params(1), 0.0)


def test_circle_components_match_closed_form():
    dom = example1_domain(Example1Params(3))
    rng = np.random.default_rng(11)
    # log-uniform over (e^-1, alpha_3)
    for a in np.exp(rng.uniform(-1.0, 12 * PI, 1000)):
        assert len(circle_components(dom, float(a))) == component_count(Example1Params(3), float(a))


def test_params_validated():
    with pytest.raises(DomainError):
        Example1Params(0)
    with pytest.raises(DomainError):
        Example2Params(0)


# --- example 2 ------------------------------------------------------------------

def test_example2_ring1_gap():
    dom = example2_domain(Example2Params(2))
    arcs = [p for p in dom.pieces if isinstance(p, ArcSlit) and p.radius == math.e]
    assert sorted((a.angle_lo, a.angle_hi) for a in arcs) == [(-1.0, -1 / 40), (1 / 40, 1.0)]
    assert isinstance(locate(math.e + 0j, dom), Inside)
    assert distance_to_boundary(math.e * np.exp(0.5j), dom) < 1e-12


def test_example2_basepoint_and_walls():
    dom = example2_domain()
    assert dom.basepoint == pytest.approx(math.exp(0.25))
    assert isinstance(locate(dom.basepoint, dom), Inside)
    walls = sorted(p.angle for p in dom.pieces if isinstance(p, SectorWall))
    assert walls == [-1.0, 1.0]
    assert any(isinstance(p, Circle) and p.radius == 1.0 for p in dom.pieces)


def test_example2_alpha_values():
    assert example2_alpha(1) == pytest.approx(math.exp(1 - 1 / 40), rel=1e-15)
    assert example2_alpha(3) == pytest.approx(math.exp(3 - 40.0 ** -3), rel=1e-15)


def test_example2_single_component():
    p = Example2Params(4)
    dom = example2_domain(p)
    rng = np.random.default_rng(5)
    for a in rng.uniform(1.0 + 1e-9, math.exp(4), 1000):
        assert len(circle_components(dom, float(a))) == 1


@pytest.mark.parametrize("n", [1, 2, 3])
def test_example2_gates_ordered_and_interior(n):
    dom = example2_domain()
    for gates in (example2_forward_gates(n), example2_reverse_gates(n)):
        for g in gates:
            z = g.center + g.radius * np.exp(1j * 0.5 * (g.theta_lo + g.theta_hi))
            assert distance_to_boundary(complex(z), dom) >= 0.0
    assert len(example2_forward_gates(1)) == 0


# --- comb --------------------------------------------------------------------------

def test_comb_n1():
    c = comb_quadrilateral(1)
    q = c.quad
    assert (q.x1, q.y1) == pytest.approx((8 * PI, PI / 2))
    assert [w.pos for w in q.walls] == pytest.approx([PI / 4])
    assert c.gap_heights == pytest.approx((PI / 2, PI / 4))
    assert c.r_modules == (4.0,)
    assert c.ells[0].a.real == pytest.approx(5 * PI)


def test_comb_n2():
    c = comb_quadrilateral(2)
    assert c.gap_heights[2] == pytest.approx(PI / 8)
    assert c.r_modules == (4.0, 8.0)
    assert sorted({w.lo for w in c.quad.walls}) == pytest.approx([4 * PI, 8 * PI])
    # the rectangle between l_j and gamma_j at the generation-j channel height
    for j in (1, 2):
        g, l = c.gammas[j - 1], c.ells[j - 1]
        r = QuadSpec(l.a.real, 0, g.a.real, c.gap_heights[j], (), (l,), (g,))
        assert solve_module(r, PI / 64).value == pytest.approx(c.r_modules[j - 1], abs=1e-6)


def test_comb_r_modules_closed_form():
    # m(R_j) = pi / (gap height) with the channel straightened over length pi
    for n in (1, 2, 3):
        c = comb_quadrilateral(n)
        for j in range(1, n + 1):
            assert c.r_modules[j - 1] == pytest.approx(PI / c.gap_heights[j])


def test_comb_gap_heights_halve():
    c = comb_quadrilateral(3)
    h = c.gap_heights
    for a, b in zip(h, h[1:]):
        assert b / a == 0.5


def test_comb_degenerate_rectangle():
    c = comb_quadrilateral(0)
    assert not c.quad.walls
    assert solve_module(c.quad, PI / 16).value == pytest.approx(4 * PI / (PI / 2), abs=1e-6)


def test_comb_depth_limit():
    with pytest.raises(DepthTooLarge):
        comb_quadrilateral(4)
    with pytest.raises(DomainError):
        comb_quadrilateral(-1)


# --- standard domains ---------------------------------------------------------------

def test_strip_boundary_lines():
    dom = strip_domain(1.0)
    segs = [p for p in dom.pieces if isinstance(p, Segment)]
    horiz = sorted({p.a.imag for p in segs if p.a.imag == p.b.imag})
    assert horiz == [-1.0, 1.0]
    assert distance_to_boundary(0.3j, dom) == pytest.approx(0.7)


def test_sector_walls():
    dom = sector_domain(PI / 4)
    assert sorted(p.angle for p in dom.pieces) == pytest.approx([-PI / 4, PI / 4])
    assert all(p.r_start == 0 for p in dom.pieces)
    with pytest.raises(DomainError):
        sector_domain(0.0)


def test_slit_disk():
    dom = slit_disk(0.5)
    seg = dom.pieces[1]
    assert (seg.a, seg.b) == (-1 + 0j, -0.5 + 0j)
    assert bn_lower_bound(0.5) == pytest.approx(0.2162548, abs=1e-4)
    with pytest.raises(DomainError):
        slit_disk(1.0)


def test_parse_and_build_domain():
    spec = parse_domain("sector:half=0.5")
    assert spec.family == "sector" and spec.params["half"] == 0.5
    assert str(parse_domain(str(spec))) == str(spec)
    assert build_domain("example1:n=2").meta["n_max"] == 2
    with pytest.raises(DomainError):
        parse_domain("torus")
    with pytest.raises(DomainError):
        parse_domain("sector:width=1")
