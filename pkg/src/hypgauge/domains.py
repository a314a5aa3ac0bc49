"""Constructors for the model domains and their natural splitting gates.

``example1`` is the ray fan: four rays from radius 1 on the axes plus, for
each generation l >= 1, 2^(l+1) rays from radius exp(4 l pi) bisecting the
previous channels. ``example2`` is the sector ``|arg z| < 1`` outside the
unit disk with arc slits on the circles ``|z| = e^n`` leaving a gap
``|arg z| < 40^-n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DepthTooLarge, DomainError
from .geometry import (AngularInterval, ArcSlit, Circle, RadialRay, SectorWall, Segment,
                       SlitDomain)

FOUR_PI = 4 * math.pi


@dataclass(frozen=True)
class Example1Params:
    n_max: int = 3

    def __post_init__(self):
        if self.n_max < 1:
            raise DomainError("n_max must be >= 1")


@dataclass(frozen=True)
class Example2Params:
    n_max: int = 4

    def __post_init__(self):
        if self.n_max < 1:
            raise DomainError("n_max must be >= 1")


def _params(p, cls):
    if p is None:
        return cls()
    if isinstance(p, int):
        return cls(p)
    return p


# --- example 1: ray fan -----------------------------------------------------------

def example1_radius(l: int) -> float:
    """Tip radius of generation l."""
    return math.exp(FOUR_PI * l)


def example1_angles(l: int):
    if l == 0:
        return [k * math.pi / 2 for k in range(4)]
    step = math.pi / 2 ** l
    return [step * (0.5 + k) for k in range(2 ** (l + 1))]


def example1_domain(p=None) -> SlitDomain:
    p = _params(p, Example1Params)
    pieces = []
    for l in range(p.n_max + 1):
        r = example1_radius(l)
        pieces.extend(RadialRay(t, r) for t in example1_angles(l))
    return SlitDomain(tuple(pieces), 0j, f"example1:n={p.n_max}", {"n_max": p.n_max})


def component_count(p, alpha: float) -> int:
    """Closed-form number of components of ``{|z| = alpha}`` in the ray fan."""
    p = _params(p, Example1Params)
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if alpha < 1:
        return 1
    n = int(math.floor(math.log(alpha) / FOUR_PI))
    # guard against floor landing just below an exact alpha_n
    if example1_radius(n + 1) <= alpha:
        n += 1
    if n > p.n_max:
        raise DepthTooLarge(f"alpha = {alpha:g} is beyond generation {p.n_max}")
    return 2 ** (n + 2)


def example1_generation(alpha: float) -> int:
    return -1 if alpha < 1 else int(math.floor(math.log(alpha) / FOUR_PI + 1e-12))


def example1_channel_width(logr: float) -> float:
    g = max(0, int(math.floor(logr / FOUR_PI + 1e-12)))
    return math.pi / 2 ** (g + 1)


def example1_default_alphas(n_max=3):
    """Geometric midpoints ``exp((4n + 2) pi)`` of consecutive tip radii."""
    return [math.exp((4 * n + 2) * math.pi) for n in range(min(n_max, 3))]


def example1_probe(alpha: float):
    """Symmetry-reduced candidates for the nearest point of ``{|z| = alpha}``.

    All components are congruent; within the channel ``(0, width)`` the
    nearest point sits near the middle.
    """
    if alpha < 1:
        return [complex(alpha, 0.0)]
    g = example1_generation(alpha)
    w = math.pi / 2 ** (g + 1)
    return [alpha * np.exp(1j * w * f) for f in (0.3, 0.4, 0.5, 0.6, 0.7)]


def _log_levels(t0, t1, spacing, width_fn):
    out = []
    t = t0
    while True:
        t += spacing * width_fn(t)
        if t >= t1 - 0.5 * spacing * width_fn(t1):
            break
        out.append(t)
    return out


def example1_forward_gates(alpha: float, spacing: float = 0.3):
    """Circles ``|z| = r_k`` between 0 and alpha with ``d log r`` a fixed fraction
    of the local channel width, so every stage has a comparable pass rate."""
    ts = _log_levels(0.0, math.log(alpha), spacing, example1_channel_width)
    return [AngularInterval.full(math.exp(t)) for t in ts]


def example1_reverse_gates(z: complex, spacing: float = 0.3):
    """Circles from ``|z|`` down to radius ~1.1 for the pole-ward Green estimate."""
    t1 = math.log(abs(z))
    ts = _log_levels(math.log(1.1), t1, spacing, example1_channel_width)
    return [AngularInterval.full(math.exp(t)) for t in reversed(ts)] + \
        [AngularInterval.full(1.1)]


# --- example 2: arc slits in a sector -----------------------------------------------

def example2_alpha(n: int) -> float:
    return math.exp(n - 40.0 ** -n)


def example2_domain(p=None) -> SlitDomain:
    p = _params(p, Example2Params)
    pieces = [Circle(0j, 1.0, "exterior"), SectorWall(1.0, 1.0), SectorWall(-1.0, 1.0)]
    for n in range(1, p.n_max + 1):
        r, gap = math.exp(n), 40.0 ** -n
        pieces += [ArcSlit(r, gap, 1.0), ArcSlit(r, -1.0, -gap)]
    return SlitDomain(tuple(pieces), complex(math.exp(0.25)), f"example2:n={p.n_max}",
                      {"n_max": p.n_max})


def example2_log_domain(p=None, length: float | None = None) -> SlitDomain:
    """Image of example 2 under the principal logarithm, closed at ``x = length``.

    The half-strip ``x > 0, |y| < 1`` with vertical slits at ``x = n``; the
    far closing segment sits where the strip is exponentially thin in
    harmonic measure (default ``n_max + 20``).
    """
    p = _params(p, Example2Params)
    L = float(length if length is not None else p.n_max + 20)
    pieces = [Segment(complex(0, -1), complex(0, 1)), Segment(complex(0, 1), complex(L, 1)),
              Segment(complex(L, 1), complex(L, -1)), Segment(complex(L, -1), complex(0, -1))]
    for n in range(1, p.n_max + 1):
        if n >= L:
            break
        gap = 40.0 ** -n
        pieces += [Segment(complex(n, gap), complex(n, 1)), Segment(complex(n, -1), complex(n, -gap))]
    return SlitDomain(tuple(pieces), complex(0.25, 0), f"example2-log:n={p.n_max}",
                      {"n_max": p.n_max, "length": L})


def _gap_arc(c: float, rho: float, outer: bool) -> AngularInterval:
    """Part of ``|w - c| = rho`` lying inside (outer=False) or outside ``|w| = c``."""
    phi = math.acos(-rho / (2 * c))
    if outer:
        return AngularInterval(rho, -phi, phi, False, complex(c))
    return AngularInterval(rho, phi, 2 * math.pi - phi, False, complex(c))


def _gap_itself(j):
    g = 40.0 ** -j
    return AngularInterval(math.exp(j), -g, g)


def _geometric(r_from, r_to, q=0.5):
    k = max(1, int(math.ceil(abs(math.log(r_to / r_from)) / abs(math.log(q)))))
    return list(np.geomspace(r_from, r_to, k + 1))


def _gap_sizes(j):
    c = math.exp(j)
    return c, c * math.sin(40.0 ** -j)


_APPROACH = {1: 1.2, 2: 2.0}
_DEPART = {1: 0.7, 2: 5.0}


def _approach_radius(j):
    return _APPROACH.get(j, 0.27 * math.exp(j))


def _depart_radius(j):
    return _DEPART.get(j, 0.68 * math.exp(j))


def _annulus(alpha):
    """Index k with ``e^(k-1) <= alpha < e^k``."""
    return int(math.floor(math.log(alpha))) + 1


def _through_gap(j, inward=False):
    c, h = _gap_sizes(j)
    approach = [_gap_arc(c, r, False) for r in _geometric(_approach_radius(j), 3 * h)]
    depart = [_gap_arc(c, r, True) for r in _geometric(3 * h, _depart_radius(j))]
    if inward:
        return [g for g in reversed(depart)] + [_gap_itself(j)] + list(reversed(approach))
    return approach + [_gap_itself(j)] + depart


def example2_forward_gates(n=None, alpha=None):
    """Gates from the basepoint to the level circle ``|z| = alpha`` (default alpha_n).

    Around each gap j crossed: arcs centred on the gap point ``e^j``
    shrinking on the inner side, the gap itself, then arcs growing on the
    outer side; finally level circles in the annulus of alpha.
    """
    alpha = example2_alpha(n) if alpha is None else float(alpha)
    k = _annulus(alpha)
    gates = []
    for j in range(1, k):
        gates += _through_gap(j)
    if k >= 2:
        c = math.exp(k - 1)
        # departure arcs must stay clear of the target circle
        gates = [g for g in gates if not (g.center == c and g.theta_lo < 0
                                          and g.radius >= 0.8 * (alpha - c))]
        lo = c + _depart_radius(k - 1)
        if alpha > lo:
            gates += [AngularInterval.full(r) for r in _geometric(lo, alpha, 0.8)[1:-1]]
    return gates


def example2_reverse_gates(n=None, alpha=None):
    """Gates from the real point ``alpha`` (default alpha_n) back to the basepoint.

    alpha_n sits in the mouth of gap n, so the chain opens with inner-side
    arcs growing out of that gap, then mirrors the forward chain.
    """
    alpha = example2_alpha(n) if alpha is None else float(alpha)
    k = _annulus(alpha)
    ck, hk = _gap_sizes(k)
    gates = []
    dist = ck - alpha
    if dist < _approach_radius(k) / 1.5:
        r0 = max(2 * hk, 1.5 * dist)
        gates += [_gap_arc(ck, r, False) for r in _geometric(r0, _approach_radius(k))]
        hi = ck - _approach_radius(k)
    else:
        hi = alpha
    if k >= 2:
        c = math.exp(k - 1)
        lo = c + _depart_radius(k - 1)
        if hi > lo:
            gates += [AngularInterval.full(r) for r in _geometric(hi, lo, 0.8)[1:-1]]
        for j in range(k - 1, 0, -1):
            chain = _through_gap(j, inward=True)
            if j == k - 1:
                far = alpha - c
                chain = [g for g in chain if not (g.center == c and g.theta_lo < 0 and g.radius >= 0.7 * far)]
            gates += chain
    return gates


EXAMPLE2_POLE_RADIUS = 0.15


# --- simple families ----------------------------------------------------------------

def sector_domain(half_opening: float) -> SlitDomain:
    if not 0 < half_opening < math.pi:
        raise DomainError("half_opening must lie in (0, pi)")
    return SlitDomain((SectorWall(half_opening), SectorWall(-half_opening)), 1 + 0j,
                      f"sector:half={half_opening!r}", {"half": half_opening})


def sector_gates(start: float, stop: float, step: float = 0.35):
    """Origin-centred circles strictly between radii ``start`` and ``stop``."""
    k = int(math.ceil(abs(math.log(stop / start)) / step))
    rs = np.geomspace(start, stop, k + 1)[1:-1]
    return [AngularInterval.full(float(r)) for r in rs]


def strip_domain(half_width: float = 1.0, length: float = 50.0) -> SlitDomain:
    """``|Im z| < half_width`` closed off at ``|Re z| = length``."""
    if not half_width > 0 or not length > 0:
        raise DomainError("half_width and length must be positive")
    a, b = length, half_width
    c = [complex(-a, -b), complex(a, -b), complex(a, b), complex(-a, b)]
    pieces = tuple(Segment(c[k], c[(k + 1) % 4]) for k in range(4))
    return SlitDomain(pieces, 0j, f"strip:w={half_width!r}", {"half_width": b, "length": a})


def half_plane_domain(size: float = 1e3) -> SlitDomain:
    """Upper half-plane truncated to the square ``[-size, size] x [0, 2 size]``."""
    s = size
    c = [complex(-s, 0), complex(s, 0), complex(s, 2 * s), complex(-s, 2 * s)]
    pieces = tuple(Segment(c[k], c[(k + 1) % 4]) for k in range(4))
    return SlitDomain(pieces, 1j, "halfplane", {"size": s})


def unit_disk() -> SlitDomain:
    return SlitDomain((Circle(0j, 1.0),), 0j, "disk")


def slit_disk(r0: float) -> SlitDomain:
    """Unit disk minus the radial slit ``[-1, -r0]``."""
    if not 0 < r0 < 1:
        raise DomainError("r0 must lie in (0, 1)")
    return SlitDomain((Circle(0j, 1.0), Segment(complex(-1, 0), complex(-r0, 0))), 0j,
                      f"slitdisk:r0={r0!r}", {"r0": r0})


def half_disk() -> SlitDomain:
    """``{|z| < 1, Im z > 0}`` shifted so that it contains 0.5i."""
    return SlitDomain((Circle(0j, 1.0), Segment(complex(-1, 0), complex(1, 0))), 0.5j, "halfdisk")


# --- spec strings ---------------------------------------------------------------------

@dataclass(frozen=True)
class DomainSpec:
    family: str
    params: dict

    def __str__(self):
        inner = ",".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.family}:{inner}" if inner else self.family


_DEFAULTS = {
    "example1": {"n": 3},
    "example2": {"n": 4},
    "sector": {"half": math.pi / 4},
    "strip": {"c": 0.5},
    "slitdisk": {"r0": 0.5},
}


def parse_domain(text: str) -> DomainSpec:
    """Parse ``family:key=value,...``, e.g. ``example1:n=3`` or ``sector:half=0.78``."""
    family, _, rest = text.strip().partition(":")
    if family not in _DEFAULTS:
        raise DomainError(f"unknown domain family {family!r}")
    params = dict(_DEFAULTS[family])
    for tok in filter(None, (t.strip() for t in rest.split(","))):
        key, eq, val = tok.partition("=")
        if not eq or key not in params:
            raise DomainError(f"bad parameter {tok!r} for {family}")
        params[key] = int(val) if key == "n" else float(val)
    return DomainSpec(family, params)


def build_domain(spec) -> SlitDomain:
    if isinstance(spec, str):
        spec = parse_domain(spec)
    p = spec.params
    if spec.family == "example1":
        return example1_domain(Example1Params(p["n"]))
    if spec.family == "example2":
        return example2_domain(Example2Params(p["n"]))
    if spec.family == "sector":
        return sector_domain(p["half"])
    if spec.family == "strip":
        return strip_domain(1.0)
    return slit_disk(p["r0"])


# --- log-plane comb ------------------------------------------------------------------

@dataclass(frozen=True)
class Comb:
    """Log image of one quadrant of the ray fan, truncated after generation n.

    ``quad`` runs from the left edge (the unit-circle arc) to the bottom
    channel of the right edge. ``gammas[j-1]`` and ``ells[j-1]`` are the
    crosscuts at ``x = (4j+2) pi`` and ``(4j+1) pi`` spanning the bottom
    channel of generation j; ``r_modules[j-1] = 2^(j+1)`` is the module of
    the rectangle between them.
    """

    n: int
    quad: object
    gammas: tuple
    ells: tuple
    r_modules: tuple
    gap_heights: tuple


COMB_MAX_DEPTH = 3


def comb_quadrilateral(n: int) -> Comb:
    from .modules import QuadSpec, Side, Wall

    if n < 0:
        raise DomainError("n must be nonnegative")
    if n > COMB_MAX_DEPTH:
        raise DepthTooLarge(f"comb depth {n} exceeds {COMB_MAX_DEPTH}")
    X, H = 4 * (n + 1) * math.pi, math.pi / 2
    walls = []
    for l in range(1, n + 1):
        step = math.pi / 2 ** l
        k = 0
        while step * (0.5 + k) < H:
            walls.append(Wall("h", step * (0.5 + k), FOUR_PI * l, X))
            k += 1
    heights = tuple(math.pi / 2 ** (j + 1) for j in range(n + 1))
    quad = QuadSpec(0.0, 0.0, X, H, tuple(walls), (Side(0, 1j * H),),
                    (Side(X, complex(X, heights[n])),), f"comb:n={n}")
    gam = tuple(Side((4 * j + 2) * math.pi, complex((4 * j + 2) * math.pi, heights[j]))
                for j in range(1, n + 1))
    ell = tuple(Side((4 * j + 1) * math.pi, complex((4 * j + 1) * math.pi, heights[j]))
                for j in range(1, n + 1))
    rmods = tuple(float(2 ** (j + 1)) for j in range(1, n + 1))
    return Comb(n, quad, gam, ell, rmods, heights)
