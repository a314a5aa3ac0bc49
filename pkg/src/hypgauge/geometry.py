"""Slit domains: planar domains whose complement is a finite union of rays,
circular-arc slits, sector walls, segments and circles.

Points are plain Python ``complex`` numbers. All geometry is exact double
precision; no boundary discretisation is involved.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Union

import numpy as np

from . import _kernels as K
from .errors import DomainError, EmptyIntersection

TWO_PI = 2.0 * math.pi
# beyond this modulus comparisons switch to a relative tolerance
ABS_SCALE = 1e3
REL_TOL = 1e-12


@dataclass(frozen=True)
class RadialRay:
    """The ray ``{s e^{i theta} : s >= r_start}``."""

    angle: float
    r_start: float

    def __post_init__(self):
        if not self.r_start > 0:
            raise DomainError("RadialRay needs r_start > 0")


@dataclass(frozen=True)
class SectorWall:
    """A ray from radius ``r_start >= 0`` that also bounds an angular wedge."""

    angle: float
    r_start: float = 0.0

    def __post_init__(self):
        if self.r_start < 0:
            raise DomainError("SectorWall needs r_start >= 0")


@dataclass(frozen=True)
class ArcSlit:
    """The closed arc ``{radius e^{it} : angle_lo <= t <= angle_hi}``."""

    radius: float
    angle_lo: float
    angle_hi: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("ArcSlit needs radius > 0")
        if not self.angle_lo < self.angle_hi:
            raise DomainError("ArcSlit needs angle_lo < angle_hi")


@dataclass(frozen=True)
class Segment:
    a: complex
    b: complex

    def __post_init__(self):
        if self.a == self.b:
            raise DomainError("degenerate segment")


@dataclass(frozen=True)
class Circle:
    """A full circle. ``interior`` keeps the inside as domain, ``exterior`` the outside."""

    center: complex
    radius: float
    orientation: str = "interior"

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("Circle needs radius > 0")
        if self.orientation not in ("interior", "exterior"):
            raise DomainError(f"bad orientation {self.orientation!r}")


SlitPiece = Union[RadialRay, SectorWall, ArcSlit, Segment, Circle]


@dataclass(frozen=True)
class AngularInterval:
    """An open arc of the circle ``|z - center| = radius``.

    Also used as an absorbing gate curve, hence the optional ``center``.
    """

    radius: float
    theta_lo: float
    theta_hi: float
    closed_circle: bool = False
    center: complex = 0j

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("radius must be positive")
        if not (self.theta_lo < self.theta_hi <= self.theta_lo + TWO_PI + 1e-12):
            raise DomainError("need theta_lo < theta_hi <= theta_lo + 2pi")
        if self.closed_circle and abs(self.theta_hi - self.theta_lo - TWO_PI) > 1e-9:
            raise DomainError("a closed circle spans exactly 2pi")

    @classmethod
    def full(cls, radius, center=0j):
        return cls(radius, -math.pi, math.pi, True, complex(center))

    @property
    def midpoint(self) -> complex:
        t = 0.5 * (self.theta_lo + self.theta_hi)
        return self.center + self.radius * cmath.exp(1j * t)

    @property
    def length(self) -> float:
        return self.radius * (self.theta_hi - self.theta_lo)

    def points(self, n):
        """``n`` interior points, evenly spread, endpoints excluded."""
        t = self.theta_lo + (np.arange(n) + 0.5) / n * (self.theta_hi - self.theta_lo)
        return self.center + self.radius * np.exp(1j * t)


def pack(curves) -> np.ndarray:
    """Pack pieces and gate curves into the kernel row format."""
    rows = np.zeros((len(curves), K.ROW))
    for k, c in enumerate(curves):
        r = rows[k]
        if isinstance(c, (RadialRay, SectorWall)):
            r[:4] = K.RAY, math.cos(c.angle), math.sin(c.angle), c.r_start
        elif isinstance(c, ArcSlit):
            r[:6] = K.ARC, 0.0, 0.0, c.radius, c.angle_lo, c.angle_hi - c.angle_lo
        elif isinstance(c, Segment):
            r[:5] = K.SEGMENT, c.a.real, c.a.imag, c.b.real, c.b.imag
        elif isinstance(c, Circle):
            r[:4] = K.CIRCLE, c.center.real, c.center.imag, c.radius
        elif isinstance(c, AngularInterval):
            if c.closed_circle:
                r[:4] = K.CIRCLE, c.center.real, c.center.imag, c.radius
            else:
                r[:6] = (K.ARC, c.center.real, c.center.imag, c.radius,
                         c.theta_lo, c.theta_hi - c.theta_lo)
        else:
            raise TypeError(f"cannot pack {c!r}")
    return rows


class Inside(NamedTuple):
    pass


class OnBoundary(NamedTuple):
    piece: int
    parameter: float


class Outside(NamedTuple):
    pass


def _tol(z: complex, tol: float) -> float:
    return tol * max(1.0, abs(z) / ABS_SCALE)


@dataclass(frozen=True)
class SlitDomain:
    """A planar domain given by the pieces of its complement and a basepoint.

    Region membership: interior/exterior circles, closed loops of segments and
    the angular wedges cut out by sector walls (walls are treated as full rays
    from the origin for this purpose) all separate the plane; a point is
    Outside when it lies on a different side of any of them than the basepoint.
    Rays, arc slits and open segment chains are two-sided slits.
    """

    pieces: tuple
    basepoint: complex
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        object.__setattr__(self, "basepoint", complex(self.basepoint))
        if not self.pieces:
            raise DomainError("a domain needs at least one boundary piece")
        if distance_to_boundary(self.basepoint, self) <= 0.0:
            raise DomainError("basepoint lies on the boundary")
        if not self._same_region(self.basepoint):
            raise DomainError("basepoint is not inside the domain")

    @cached_property
    def packed(self) -> np.ndarray:
        return pack(self.pieces)

    @cached_property
    def _loops(self):
        return _segment_loops([p for p in self.pieces if isinstance(p, Segment)])

    @cached_property
    def _wall_angles(self):
        walls = sorted(p.angle % TWO_PI for p in self.pieces if isinstance(p, SectorWall))
        return walls

    def _wedge(self, z):
        walls = self._wall_angles
        t = cmath.phase(z) % TWO_PI
        # index of the wedge [walls[i], walls[i+1]) containing t
        return int(np.searchsorted(walls, t, side="right")) % len(walls)

    def _same_region(self, z: complex) -> bool:
        b = self.basepoint
        for p in self.pieces:
            if isinstance(p, Circle):
                inside = abs(z - p.center) < p.radius
                if inside != (p.orientation == "interior"):
                    return False
        for loop in self._loops:
            if _point_in_polygon(z, loop) != _point_in_polygon(b, loop):
                return False
        if len(self._wall_angles) >= 2 and z != 0:
            if self._wedge(z) != self._wedge(b):
                return False
        return True

    def region_mask(self, zs) -> np.ndarray:
        """Vectorised :meth:`_same_region` for an array of points."""
        zs = np.asarray(zs, dtype=complex)
        ok = np.ones(zs.shape, bool)
        b = self.basepoint
        for p in self.pieces:
            if isinstance(p, Circle):
                inside = np.abs(zs - p.center) < p.radius
                ok &= inside == (p.orientation == "interior")
        for loop in self._loops:
            ok &= _points_in_polygon(zs, loop) == _point_in_polygon(b, loop)
        walls = self._wall_angles
        if len(walls) >= 2:
            t = np.angle(zs) % TWO_PI
            wedge = np.searchsorted(walls, t, side="right") % len(walls)
            ok &= (wedge == self._wedge(b)) | (zs == 0)
        return ok

    def contains(self, z: complex) -> bool:
        return distance_to_boundary(z, self) > 0.0 and self._same_region(z)

    @property
    def bounded(self) -> bool:
        return any(isinstance(p, Circle) and p.orientation == "interior" for p in self.pieces) \
            or bool(self._loops)


def _segment_loops(segs):
    """Closed polygons formed by chains of segments with matching endpoints."""
    if not segs:
        return []
    key = lambda z: (round(z.real, 12), round(z.imag, 12))
    adj = {}
    for s in segs:
        adj.setdefault(key(s.a), []).append((key(s.b), s.b))
        adj.setdefault(key(s.b), []).append((key(s.a), s.a))
    loops = []
    # drop dangling chains (slits ending on a wall) until only cycles remain
    leaves = [k for k, v in adj.items() if len(v) == 1]
    while leaves:
        k = leaves.pop()
        if k not in adj or len(adj[k]) != 1:
            continue
        other = adj.pop(k)[0][0]
        adj[other] = [e for e in adj[other] if e[0] != k]
        if len(adj[other]) == 1:
            leaves.append(other)
        elif not adj[other]:
            del adj[other]
    if not adj or any(len(v) != 2 for v in adj.values()):
        return loops
    seen = set()
    for start in adj:
        if start in seen:
            continue
        poly = []
        prev, cur = None, start
        while True:
            seen.add(cur)
            poly.append(complex(*cur))
            nxt = [k for k, _ in adj[cur] if k != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            if cur == start:
                break
        if cur == start and len(poly) >= 3:
            loops.append(np.array(poly))
    return loops


def _point_in_polygon(z, poly) -> bool:
    x, y = z.real, z.imag
    xs, ys = poly.real, poly.imag
    xj, yj = np.roll(xs, 1), np.roll(ys, 1)
    cond = (ys > y) != (yj > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = (xj - xs) * (y - ys) / (yj - ys) + xs
    return bool(np.count_nonzero(cond & (x < xint)) % 2)


def _points_in_polygon(zs, poly) -> np.ndarray:
    x, y = zs.real[..., None], zs.imag[..., None]
    xs, ys = poly.real, poly.imag
    xj, yj = np.roll(xs, 1), np.roll(ys, 1)
    cond = (ys > y) != (yj > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = (xj - xs) * (y - ys) / (yj - ys) + xs
    return (np.count_nonzero(cond & (x < xint), axis=-1) % 2).astype(bool)


def distance_to_boundary(z, dom: SlitDomain):
    """Euclidean distance from ``z`` (scalar or array) to the nearest piece."""
    P = dom.packed if isinstance(dom, SlitDomain) else pack(dom)
    arr = np.asarray(z, dtype=complex)
    out = K.distances(np.ascontiguousarray(arr.real.ravel()),
                      np.ascontiguousarray(arr.imag.ravel()), P)
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def locate(z: complex, dom: SlitDomain, tol: float = 1e-9):
    """Classify ``z`` as Inside, OnBoundary(piece, parameter) or Outside."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    z = complex(z)
    d, idx = K.nearest(z.real, z.imag, dom.packed)
    if d <= _tol(z, tol):
        par = K.point_piece(z.real, z.imag, dom.packed[idx])[3]
        return OnBoundary(int(idx), float(par))
    if not dom._same_region(z):
        return Outside()
    return Inside()


def _circle_hits(alpha, piece, tol):
    """Angles where the origin-centred circle of radius alpha meets a piece.

    Returns ``(angles, swallowed)``; ``swallowed`` is a list of angular
    ranges where the piece runs along the circle itself.
    """
    angles, swallowed = [], []
    if isinstance(piece, (RadialRay, SectorWall)):
        if piece.r_start <= alpha * (1 + REL_TOL) + 0.0:
            angles.append(piece.angle)
    elif isinstance(piece, ArcSlit):
        if abs(piece.radius - alpha) <= tol:
            swallowed.append((piece.angle_lo, piece.angle_hi))
    elif isinstance(piece, Circle):
        c, r = piece.center, piece.radius
        dc = abs(c)
        if dc <= tol and abs(r - alpha) <= tol:
            swallowed.append((-math.pi, math.pi))
        else:
            angles.extend(_circle_circle(alpha, c, r))
    elif isinstance(piece, Segment):
        a, b = piece.a, piece.b
        u = b - a
        # |a + t u|^2 = alpha^2
        A = abs(u) ** 2
        B = 2 * (a.real * u.real + a.imag * u.imag)
        C = abs(a) ** 2 - alpha ** 2
        disc = B * B - 4 * A * C
        if disc >= 0:
            sq = math.sqrt(disc)
            for t in {(-B - sq) / (2 * A), (-B + sq) / (2 * A)}:
                if -1e-12 <= t <= 1 + 1e-12:
                    angles.append(cmath.phase(a + t * u))
    return angles, swallowed


def _circle_circle(alpha, c, r):
    d = abs(c)
    if d == 0 or d > alpha + r or d < abs(alpha - r):
        return []
    # angle at the origin between c and the intersection points
    cosg = (alpha ** 2 + d ** 2 - r ** 2) / (2 * alpha * d)
    g = math.acos(max(-1.0, min(1.0, cosg)))
    base = cmath.phase(c)
    return [base - g, base + g] if g > 0 else [base]


def circle_components(dom: SlitDomain, alpha: float, tol: float = 1e-9):
    """Components of ``{|z| = alpha}`` inside ``dom`` as a CCW list of arcs.

    At a radius where a slit tip sits exactly on the circle, the tip counts
    as a cut, so the count is the limit from above.
    """
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    atol = _tol(alpha, tol)
    cuts, swallowed = [], []
    for p in dom.pieces:
        a, s = _circle_hits(alpha, p, atol)
        cuts.extend(a)
        swallowed.extend(s)
    for lo, hi in swallowed:
        cuts.extend([lo, hi])
    if not cuts:
        z = complex(alpha, 0.0)
        if dom.contains(z):
            return [AngularInterval.full(alpha)]
        raise EmptyIntersection(f"circle |z| = {alpha} misses the domain")
    base = sorted({round(t % TWO_PI, 15) for t in cuts})
    out = []
    for k, lo in enumerate(base):
        hi = base[k + 1] if k + 1 < len(base) else base[0] + TWO_PI
        if hi - lo <= 1e-15:
            continue
        mid = alpha * cmath.exp(1j * 0.5 * (lo + hi))
        if not isinstance(locate(mid, dom, tol), Inside):
            continue
        # report in (-pi, pi] where possible
        if lo > math.pi:
            lo, hi = lo - TWO_PI, hi - TWO_PI
        out.append(AngularInterval(alpha, lo, hi))
    if not out:
        raise EmptyIntersection(f"circle |z| = {alpha} misses the domain")
    out.sort(key=lambda iv: iv.theta_lo)
    return out


# --- text serialisation -------------------------------------------------------

def dumps(dom: SlitDomain) -> str:
    """Line-oriented description: a ``basepoint`` header then one piece per line."""
    lines = [f"basepoint {dom.basepoint.real!r} {dom.basepoint.imag!r}"]
    for p in dom.pieces:
        if isinstance(p, RadialRay):
            lines.append(f"ray {p.angle!r} {p.r_start!r}")
        elif isinstance(p, SectorWall):
            lines.append(f"wall {p.angle!r} {p.r_start!r}")
        elif isinstance(p, ArcSlit):
            lines.append(f"arc {p.radius!r} {p.angle_lo!r} {p.angle_hi!r}")
        elif isinstance(p, Segment):
            lines.append(f"segment {p.a.real!r} {p.a.imag!r} {p.b.real!r} {p.b.imag!r}")
        elif isinstance(p, Circle):
            o = "int" if p.orientation == "interior" else "ext"
            lines.append(f"circle {p.center.real!r} {p.center.imag!r} {p.radius!r} {o}")
    return "\n".join(lines) + "\n"


def loads(text: str, label: str = "") -> SlitDomain:
    basepoint = None
    pieces = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tag, *args = line.split()
        try:
            if tag == "basepoint":
                basepoint = complex(float(args[0]), float(args[1]))
            elif tag == "ray":
                pieces.append(RadialRay(float(args[0]), float(args[1])))
            elif tag == "wall":
                pieces.append(SectorWall(float(args[0]), float(args[1])))
            elif tag == "arc":
                pieces.append(ArcSlit(*map(float, args[:3])))
            elif tag == "segment":
                x1, y1, x2, y2 = map(float, args[:4])
                pieces.append(Segment(complex(x1, y1), complex(x2, y2)))
            elif tag == "circle":
                cx, cy, r = map(float, args[:3])
                o = {"int": "interior", "ext": "exterior"}[args[3]]
                pieces.append(Circle(complex(cx, cy), r, o))
            else:
                raise DomainError(f"unknown piece kind {tag!r}")
        except (IndexError, KeyError, ValueError) as exc:
            raise DomainError(f"line {n}: cannot parse {raw!r}") from exc
    if basepoint is None:
        raise DomainError("missing basepoint line")
    return SlitDomain(tuple(pieces), basepoint, label)
