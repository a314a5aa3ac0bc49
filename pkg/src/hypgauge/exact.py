"""Closed-form potential-theoretic quantities.

Hyperbolic distances use the normalisation of the disk metric
``2|dz| / (1 - |z|^2)``, so the right half-plane carries ``|dw| / Re w`` and
the strip ``|Im z| < 1`` carries ``(pi/2) |dz| / cos(pi Im z / 2)``.
"""
from __future__ import annotations

import math
from typing import NamedTuple, Optional

from scipy import integrate

from .errors import DomainError, OutOfDisk, PreconditionNotMet

SHARP = 8.82  # decomposition constant for modules of long quadrilaterals
SYMMETRIC = 26.46  # = 3 * SHARP, the one-sided symmetric-split constant


class BoundTriple(NamedTuple):
    lower: float
    value: Optional[float]
    upper: float


def disk_hyperbolic_distance(z: complex, w: complex) -> float:
    z, w = complex(z), complex(w)
    if abs(z) >= 1 or abs(w) >= 1:
        raise OutOfDisk("both points must lie in the open unit disk")
    rho = abs((z - w) / (1 - z * w.conjugate()))
    return 2.0 * math.atanh(rho)


def bn_lower_bound(r0: float) -> float:
    """Harmonic measure at 0 of the radial slit ``(-1, -r0]``."""
    if not 0 < r0 <= 1:
        raise DomainError("r0 must lie in (0, 1]")
    return 2 / math.pi * math.asin((1 - r0) / (1 + r0))


def radial_slit_measure(x: float) -> float:
    """``omega_D(x, [-1, -x])`` for the unit disk D."""
    if not 0 < x < 1:
        raise DomainError("x must lie in (0, 1)")
    return 2 / math.pi * math.asin(((1 - x) / (1 + x)) ** 2)


def geodesic_measure_bounds(d: float) -> BoundTriple:
    """Two-sided bounds on the measure of a geodesic at hyperbolic distance d from 0."""
    if d < 0:
        raise DomainError("distance must be nonnegative")
    e = math.exp(-d)
    return BoundTriple(e, None, 4 / math.pi * e)


def strip_line_measure(c: float) -> float:
    """Measure of the line ``Im z = -c`` seen from ``ic`` in the strip ``|Im z| < 1``."""
    if not 0 <= c < 1:
        raise DomainError("c must lie in [0, 1)")
    return (1 - c) / (1 + c)


def strip_cross_distance(c: float) -> float:
    """Hyperbolic distance from ``-ic`` to ``ic`` in the strip ``|Im z| < 1``."""
    if not 0 <= c < 1:
        raise DomainError("c must lie in [0, 1)")
    s = math.sin(c * math.pi / 2)
    return math.log((1 + s) / (1 - s))


def theorem_K(c: float) -> float:
    """The explicit constant bounding omega / exp(-d) when level sets stay within
    strip height ``c`` of their geodesic."""
    if not 0 < c < 1:
        raise DomainError("c must lie in (0, 1)")
    s = math.sin(c * math.pi / 2)
    return 4 / math.pi * (1 + c) / (1 - c) * (1 + s) / (1 - s)


def log_rectangle_module(r1: float, r2: float, theta: float) -> float:
    """Module of ``{r1 < |z| < r2, 0 < arg z < theta}`` between its circular sides."""
    if not (r2 > r1 > 0) or not (0 < theta <= 2 * math.pi):
        raise DomainError("need r2 > r1 > 0 and 0 < theta <= 2pi")
    return math.log(r2 / r1) / theta


def green_to_hyperbolic(g: float) -> float:
    """Hyperbolic distance from the pole of a Green's function whose value is g.

    ``log((1 + e^-g) / (1 - e^-g)) = -log tanh(g/2) = 2 atanh(e^-g)``; the
    tanh form keeps full relative accuracy for small g, the atanh form for
    large g.
    """
    if not g > 0:
        raise DomainError("Green's function value must be positive")
    if g < 1.0:
        return -math.log(math.tanh(0.5 * g))
    return 2.0 * math.atanh(math.exp(-g))


def hyperbolic_to_green(d: float) -> float:
    if not d > 0:
        raise DomainError("distance must be positive")
    if d < 1.0:
        return -math.log(math.tanh(0.5 * d))
    return 2.0 * math.atanh(math.exp(-d))


def beurling_upper(lam: float) -> float:
    """Upper bound ``3 pi exp(-pi lam)``; valid only for extremal distance > 2."""
    if not lam > 2:
        raise PreconditionNotMet(f"extremal distance {lam} must exceed 2")
    return 3 * math.pi * math.exp(-math.pi * lam)


def decomposition_bounds(m2: float) -> tuple[float, float]:
    """``(8.82 e^{-pi m2}, 26.46 e^{-pi m2})``, requiring ``m2 >= 3``."""
    if not m2 >= 3:
        raise PreconditionNotMet(f"m(Q2) = {m2} < 3")
    e = math.exp(-math.pi * m2)
    return SHARP * e, SYMMETRIC * e


def center_arc_measure(arc_length: float) -> float:
    if not 0 <= arc_length <= 2 * math.pi:
        raise DomainError("arc length must lie in [0, 2pi]")
    return arc_length / (2 * math.pi)


def _half_disk_arc_measure(x0: float) -> float:
    """Measure of the semicircle seen from ``x0 in (0,1)`` in ``{|w|<1, Re w>0}``.

    The half-disk goes to the upper half-plane by ``u = i w`` followed by
    ``s = ((1+u)/(1-u))^2``; the semicircle lands on the negative real axis,
    and its measure is the Poisson integral of that ray. ``t = -tan v`` puts
    the ray on a finite interval with a bounded integrand.
    """
    u = 1j * x0
    s = ((1 + u) / (1 - u)) ** 2
    a, b = s.real, s.imag

    def integrand(v):
        t = math.tan(v)
        return b / ((t + a) ** 2 + b * b) / math.cos(v) ** 2

    val, _ = integrate.quad(integrand, 0.0, math.pi / 2, epsabs=1e-14, epsrel=1e-12, limit=200)
    return val / math.pi


def sector_oracle(half_opening: float, base: float, alpha: float, arc_index: int = 0):
    """Exact ``(omega, d)`` for the level arc ``|z| = alpha`` of the sector
    ``|arg z| < half_opening`` seen from the real point ``base``.

    omega is taken in the component of the sector minus the arc containing
    ``base``; d is the hyperbolic distance in the whole sector. The sector has
    a single level arc, so only ``arc_index = 0`` is valid.
    """
    if not (0 < half_opening <= math.pi) or not base > 0 or not alpha > 0:
        raise DomainError("need 0 < half_opening <= pi and positive base, alpha")
    if arc_index != 0:
        raise DomainError("a sector has one level arc")
    if alpha == base:
        return 1.0, 0.0
    k = math.pi / (2 * half_opening)
    d = k * abs(math.log(alpha / base))
    # z -> alpha^2 / z swaps the inner and outer components
    start = base if alpha > base else alpha * alpha / base
    x0 = (start / alpha) ** k
    return _half_disk_arc_measure(x0), d
