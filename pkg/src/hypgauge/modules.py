"""Conformal modules of rectilinear quadrilaterals by cell-centred finite volumes.

A quadrilateral is a rectangle minus axis-aligned walls, with two measured
sides A and B given as lists of axis-aligned segments (outer edges or
interior crosscuts). ``m(Q)`` is the extremal distance from A to B: the
reciprocal of the Dirichlet energy of the potential that is 0 on A, 1 on B
and insulated elsewhere. The conjugate problem (0 and 1 on the two
remaining boundary arcs, A and B insulated) has energy m(Q); the reported
value is the geometric mean of the two, which on a grid satisfies the serial
rule exactly and cancels much of the discretisation error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import pyamg
from scipy.sparse import coo_matrix, csgraph
from scipy.sparse.linalg import cg

from .errors import Disconnected, DomainError, GridTooCoarse, NonRectilinear, PreconditionNotMet
from .exact import SHARP, SYMMETRIC

RTOL = 1e-10
MIN_CELLS = 4


@dataclass(frozen=True)
class Wall:
    """Axis-aligned slit: ``orient='v'`` is the segment x = pos, lo <= y <= hi."""

    orient: str
    pos: float
    lo: float
    hi: float

    def __post_init__(self):
        if self.orient not in ("v", "h") or not self.lo < self.hi:
            raise DomainError(f"bad wall {self!r}")


@dataclass(frozen=True)
class Side:
    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        if a == b:
            raise DomainError("degenerate side")
        if a.real != b.real and a.imag != b.imag:
            raise NonRectilinear(f"side {a}..{b} is not axis-aligned")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def vertical(self):
        return self.a.real == self.b.real


@dataclass(frozen=True)
class QuadSpec:
    x0: float
    y0: float
    x1: float
    y1: float
    walls: tuple = ()
    side_a: tuple = ()
    side_b: tuple = ()
    label: str = ""

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise DomainError("empty rectangle")
        if not self.side_a or not self.side_b:
            raise DomainError("both measured sides are required")
        for name in ("walls", "side_a", "side_b"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    @classmethod
    def rectangle(cls, width, height, label=""):
        """Rectangle measured between its vertical sides (module width/height)."""
        return cls(0.0, 0.0, width, height, (), (Side(0, 1j * height),),
                   (Side(width, width + 1j * height),), label)

    @classmethod
    def from_markers(cls, x0, y0, x1, y1, markers, walls=(), label=""):
        """Sides (z1, z2) and (z3, z4) traced counterclockwise along the outer edge."""
        z = [complex(m) for m in markers]
        if len(z) != 4 or len(set(z)) != 4:
            raise DomainError("need four distinct markers")
        per = _Perimeter(x0, y0, x1, y1)
        s = [per.param(w) for w in z]
        if not _ccw(s):
            raise DomainError("markers must be in counterclockwise order")
        return cls(x0, y0, x1, y1, tuple(walls), per.arc(s[0], s[1]), per.arc(s[2], s[3]), label)

    def with_sides(self, side_a, side_b, label=""):
        return QuadSpec(self.x0, self.y0, self.x1, self.y1, self.walls, tuple(side_a),
                        tuple(side_b), label or self.label)

    def swapped(self):
        return self.with_sides(self.side_b, self.side_a)

    def conjugate(self, label=""):
        """Quadrilateral measured between the two other boundary arcs (module 1/m).

        Both measured sides must lie on the outer rectangle; each tooth must
        hang from the outer rectangle and joins the arc it is attached to.
        """
        per = _Perimeter(self.x0, self.y0, self.x1, self.y1)
        iv = sorted(per.interval(s) for s in self.side_a + self.side_b)
        gaps, end = [], iv[0][1]
        for lo, hi in iv[1:]:
            if lo > end + 1e-12 * per.total:
                gaps.append((end, lo))
            end = max(end, hi)
        if iv[0][0] + per.total > end + 1e-12 * per.total:
            gaps.append((end, iv[0][0] + per.total))
        if len(gaps) != 2:
            raise DomainError("measured sides do not split the outer boundary into four arcs")
        arcs = [list(per.arc(*g)) for g in gaps]
        eps = 1e-12 * per.total
        for w in self.walls:
            seg = Side(complex(w.pos, w.lo), complex(w.pos, w.hi)) if w.orient == "v" else \
                Side(complex(w.lo, w.pos), complex(w.hi, w.pos))
            foot = [z for z in (seg.a, seg.b) if per.on_boundary(z)]
            if len(foot) != 1:
                raise DomainError(f"tooth {w} must touch the outer boundary exactly once")
            t = per.param(foot[0])
            for k, (lo, hi) in enumerate(gaps):
                if lo - eps <= t <= hi + eps or lo - eps <= t + per.total <= hi + eps:
                    arcs[k].append(seg)
                    break
            else:
                raise DomainError(f"tooth {w} is attached to a measured side")
        return self.with_sides(arcs[0], arcs[1], label or self.label)

    def dumps(self) -> str:
        out = [f"rect {self.x0!r} {self.y0!r} {self.x1!r} {self.y1!r}"]
        for w in self.walls:
            tag = "tooth" if w.orient == "v" else "htooth"
            out.append(f"{tag} {w.pos!r} {w.lo!r} {w.hi!r}")
        for tag, sides in (("A", self.side_a), ("B", self.side_b)):
            for s in sides:
                out.append(f"side {tag} {s.a.real!r} {s.a.imag!r} {s.b.real!r} {s.b.imag!r}")
        return "\n".join(out) + "\n"

    @classmethod
    def loads(cls, text: str, label=""):
        rect, walls, sides = None, [], {"A": [], "B": []}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tag, *args = line.split()
            try:
                if tag == "rect":
                    rect = tuple(map(float, args[:4])) if len(args) >= 4 else \
                        (0.0, 0.0, float(args[0]), float(args[1]))
                elif tag in ("tooth", "htooth"):
                    walls.append(Wall("v" if tag == "tooth" else "h", *map(float, args[:3])))
                elif tag == "side":
                    x1, y1, x2, y2 = map(float, args[1:5])
                    sides[args[0]].append(Side(complex(x1, y1), complex(x2, y2)))
                else:
                    raise DomainError(f"unknown entry {tag!r}")
            except (IndexError, KeyError, ValueError) as exc:
                raise DomainError(f"line {n}: cannot parse {raw!r}") from exc
        if rect is None:
            raise DomainError("missing rect line")
        return cls(*rect, tuple(walls), tuple(sides["A"]), tuple(sides["B"]), label)


def _ccw(s):
    # cyclic order check allowing one wrap-around
    drops = sum(b <= a for a, b in zip(s, s[1:] + s[:1]))
    return drops == 1


class _Perimeter:
    def __init__(self, x0, y0, x1, y1):
        self.c = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
        self.L = [abs(self.c[(k + 1) % 4] - self.c[k]) for k in range(4)]
        self.total = sum(self.L)

    def param(self, z):
        acc = 0.0
        for k in range(4):
            a, b = self.c[k], self.c[(k + 1) % 4]
            t = abs(z - a)
            if abs(t + abs(b - z) - self.L[k]) < 1e-12 * self.total:
                return acc + t
            acc += self.L[k]
        raise DomainError(f"marker {z} is not on the rectangle boundary")

    def on_boundary(self, z):
        try:
            self.param(z)
        except DomainError:
            return False
        return True

    def interval(self, side):
        lo, hi = sorted((self.param(side.a), self.param(side.b)))
        if lo == 0.0 and side.vertical and side.a.real == self.c[0].real:
            lo, hi = hi, self.total     # segment on the left edge ending at the first corner
        return lo, hi

    def point(self, s):
        s %= self.total
        for k in range(4):
            if s <= self.L[k]:
                a, b = self.c[k], self.c[(k + 1) % 4]
                return a + (b - a) * (s / self.L[k])
            s -= self.L[k]
        return self.c[0]

    def arc(self, s0, s1):
        if s1 < s0:
            s1 += self.total
        cuts = [s0]
        corners = np.cumsum([0.0] + self.L)
        corners = np.concatenate([corners, corners[1:] + self.total])
        cuts += [c for c in corners if s0 < c < s1]
        cuts.append(s1)
        return tuple(Side(self.point(a), self.point(b)) for a, b in zip(cuts, cuts[1:]) if b > a)


@dataclass(frozen=True)
class ModuleEstimate:
    value: float
    grid_h: float
    error_bound: float
    detail: dict = field(default_factory=dict, compare=False, repr=False)


# --- discretisation ---------------------------------------------------------------

def _index(v, origin, h, n, what):
    k = (v - origin) / h
    r = round(k)
    if abs(k - r) > 1e-6 or r < 0 or r > n:
        raise GridTooCoarse(f"{what} at {v!r} is not on the grid of spacing {h!r}")
    return int(r)


class _Grid:
    def __init__(self, q: QuadSpec, h: float):
        self.q, self.h = q, h
        self.nx = _index(q.x1, q.x0, h, 10 ** 9, "width")
        self.ny = _index(q.y1, q.y0, h, 10 ** 9, "height")
        nx, ny = self.nx, self.ny
        # vopen[i, j]: face between cells (i-1, j) and (i, j), i = 0..nx (edges closed)
        self.vopen = np.ones((nx + 1, ny), bool)
        self.hopen = np.ones((nx, ny + 1), bool)
        self.vopen[[0, nx], :] = False
        self.hopen[:, [0, ny]] = False
        self.vwall = np.zeros((nx + 1, ny), bool)
        self.hwall = np.zeros((nx, ny + 1), bool)
        for w in q.walls:
            self._wall(w)
        self.vside = np.zeros((nx + 1, ny), np.int8)  # 1 = A, 2 = B
        self.hside = np.zeros((nx, ny + 1), np.int8)
        for tag, sides in ((1, q.side_a), (2, q.side_b)):
            for s in sides:
                self._side(s, tag)

    def _span(self, lo, hi, origin, n, what):
        a = _index(max(lo, origin), origin, self.h, n, what)
        b = _index(min(hi, origin + n * self.h), origin, self.h, n, what)
        return a, b

    def _wall(self, w: Wall):
        q = self.q
        if w.orient == "v":
            i = _index(w.pos, q.x0, self.h, self.nx, "tooth")
            a, b = self._span(w.lo, w.hi, q.y0, self.ny, "tooth end")
            self.vopen[i, a:b] = False
            self.vwall[i, a:b] = True
        else:
            j = _index(w.pos, q.y0, self.h, self.ny, "tooth")
            a, b = self._span(w.lo, w.hi, q.x0, self.nx, "tooth end")
            self.hopen[a:b, j] = False
            self.hwall[a:b, j] = True

    def _side(self, s: Side, tag):
        q = self.q
        if s.vertical:
            i = _index(s.a.real, q.x0, self.h, self.nx, "side")
            lo, hi = sorted((s.a.imag, s.b.imag))
            a, b = self._span(lo, hi, q.y0, self.ny, "side end")
            self.vside[i, a:b] = tag
            self.vopen[i, a:b] = False
        else:
            j = _index(s.a.imag, q.y0, self.h, self.ny, "side")
            lo, hi = sorted((s.a.real, s.b.real))
            a, b = self._span(lo, hi, q.x0, self.nx, "side end")
            self.hside[a:b, j] = tag
            self.hopen[a:b, j] = False

    def check_resolution(self):
        """Walls, gaps and sides must span at least MIN_CELLS cells."""
        h, q = self.h, self.q
        for w in q.walls:
            if (min(w.hi, q.y1 if w.orient == "v" else q.x1)
                    - max(w.lo, q.y0 if w.orient == "v" else q.x0)) < MIN_CELLS * h - 1e-9:
                raise GridTooCoarse(f"tooth {w} spans fewer than {MIN_CELLS} cells")
        for orient in ("v", "h"):
            lines = [(w.pos, w.lo, w.hi) for w in q.walls if w.orient == orient]
            if orient == "v":
                lines += [(q.x0, q.y0, q.y1), (q.x1, q.y0, q.y1)]
            else:
                lines += [(q.y0, q.x0, q.x1), (q.y1, q.x0, q.x1)]
            for k, (p1, a1, b1) in enumerate(lines):
                for p2, a2, b2 in lines[k + 1:]:
                    if min(b1, b2) > max(a1, a2) and 0 < abs(p1 - p2) < MIN_CELLS * h - 1e-9:
                        raise GridTooCoarse(f"gap of width {abs(p1 - p2):g} under {MIN_CELLS} cells")
        for s in q.side_a + q.side_b:
            if abs(s.b - s.a) < MIN_CELLS * h - 1e-9:
                raise GridTooCoarse(f"side {s} spans fewer than {MIN_CELLS} cells")

    def cell(self, i, j):
        return i * self.ny + j

    def links(self):
        """Open interior faces as index pairs."""
        nx, ny = self.nx, self.ny
        I, J = np.nonzero(self.vopen[1:nx, :])
        a = self.cell(I, J)
        b = self.cell(I + 1, J)
        I2, J2 = np.nonzero(self.hopen[:, 1:ny])
        c = self.cell(I2, J2)
        d = self.cell(I2, J2 + 1)
        return np.concatenate([a, c]), np.concatenate([b, d])

    def boundary_faces(self):
        """Every closed face side touching a cell: (cell, tag, v0, v1, kind).

        ``tag`` is 1/2 for A/B, 0 for other boundary. Vertices are grid vertex
        ids ``i * (ny + 1) + j``; ``kind`` distinguishes wall faces.
        """
        nx, ny = self.nx, self.ny
        V = lambda i, j: i * (ny + 1) + j
        out = []
        closed_v = ~self.vopen
        for i, j in zip(*np.nonzero(closed_v)):
            tag = int(self.vside[i, j])
            for ci in (i - 1, i):
                if 0 <= ci < nx:
                    out.append((self.cell(ci, j), tag, V(i, j), V(i, j + 1)))
        closed_h = ~self.hopen
        for i, j in zip(*np.nonzero(closed_h)):
            tag = int(self.hside[i, j])
            for cj in (j - 1, j):
                if 0 <= cj < ny:
                    out.append((self.cell(i, cj), tag, V(i, j), V(i + 1, j)))
        return np.array(out, dtype=np.int64).reshape(-1, 4)


def _solve_energy(n, li, lj, dcell, dval, active_idx):
    """Minimise sum (u_i - u_j)^2 over links + 2 (u_c - g)^2 over Dirichlet faces."""
    m = active_idx.size
    pos = -np.ones(n, np.int64)
    pos[active_idx] = np.arange(m)
    a, b = pos[li], pos[lj]
    diag = np.bincount(a, minlength=m) + np.bincount(b, minlength=m) + \
        2.0 * np.bincount(pos[dcell], minlength=m)
    rows = np.concatenate([a, b, np.arange(m)])
    cols = np.concatenate([b, a, np.arange(m)])
    vals = np.concatenate([-np.ones(a.size), -np.ones(a.size), diag])
    A = coo_matrix((vals, (rows, cols)), shape=(m, m)).tocsr()
    rhs = np.bincount(pos[dcell], weights=2.0 * dval, minlength=m)
    ml = pyamg.smoothed_aggregation_solver(A, symmetry="symmetric")
    x0 = np.full(m, float(dval.mean()) if dval.size else 0.0)
    u, info = cg(A, rhs, x0=x0, rtol=RTOL, atol=0.0, M=ml.aspreconditioner(cycle="V"),
                 maxiter=2000)
    if info != 0:
        raise GridTooCoarse(f"linear solve did not converge (info={info})")
    E = float(np.sum((u[a] - u[b]) ** 2) + np.sum(2.0 * (u[pos[dcell]] - dval) ** 2))
    return E


def _grid_module(q: QuadSpec, h: float):
    g = _Grid(q, h)
    n = g.nx * g.ny
    li, lj = g.links()
    comp_graph = coo_matrix((np.ones(li.size), (li, lj)), shape=(n, n))
    ncomp, labels = csgraph.connected_components(comp_graph, directed=False)
    faces = g.boundary_faces()
    fa = faces[faces[:, 1] == 1, 0]
    fb = faces[faces[:, 1] == 2, 0]
    touch = np.intersect1d(labels[fa], labels[fb])
    if touch.size == 0:
        raise Disconnected("sides A and B lie in different components")
    active = np.isin(labels, touch)
    act_idx = np.flatnonzero(active)
    keep = active[li]
    li, lj = li[keep], lj[keep]
    faces = faces[active[faces[:, 0]]]
    isA, isB = faces[:, 1] == 1, faces[:, 1] == 2
    dcell = np.concatenate([faces[isA, 0], faces[isB, 0]])
    dval = np.concatenate([np.zeros(isA.sum()), np.ones(isB.sum())])
    E = _solve_energy(n, li, lj, dcell, dval, act_idx)
    primary = 1.0 / E
    # conjugate problem on the two remaining boundary arcs
    rest = faces[faces[:, 1] == 0]
    dual = None
    if rest.size:
        nv = (g.nx + 1) * (g.ny + 1)
        arcs_graph = coo_matrix((np.ones(len(rest)), (rest[:, 2], rest[:, 3])), shape=(nv, nv))
        _, vlab = csgraph.connected_components(arcs_graph, directed=False)
        arc_of = vlab[rest[:, 2]]
        ids = np.unique(arc_of)
        if ids.size == 2:
            dcell2 = rest[:, 0]
            dval2 = (arc_of == ids[1]).astype(float)
            dual = _solve_energy(n, li, lj, dcell2, dval2, act_idx)
    value = primary if dual is None else math.sqrt(primary * dual)
    return value, primary, dual, int(act_idx.size)


def solve_module(q: QuadSpec, h: float, order: int | None = None) -> ModuleEstimate:
    """Module of q from grids h and h/2 with Richardson extrapolation.

    The extrapolation order defaults to 2 for plain rectangles and 1 when
    walls are present (slit tips limit the convergence rate).
    """
    if not h > 0:
        raise DomainError("h must be positive")
    _Grid(q, h).check_resolution()
    mc, pc, dc, nc = _grid_module(q, h)
    mf, pf, df, nf = _grid_module(q, h / 2)
    p = order or (1 if q.walls else 2)
    ext = mf + (mf - mc) / (2 ** p - 1)
    err = abs(ext - mf) + 10 * RTOL * ext
    return ModuleEstimate(ext, h, err, {"coarse": mc, "fine": mf, "primary": pf, "dual": df,
                                        "cells": nf, "order": p})


# --- decomposition checks ----------------------------------------------------------

class SerialCheck(NamedTuple):
    residual: float
    tolerance: float
    passed: bool


def serial_rule_check(whole: ModuleEstimate, parts) -> SerialCheck:
    """``m(whole) - sum m(parts)``; non-negative up to the FD error bounds."""
    parts = list(parts)
    res = whole.value - sum(p.value for p in parts)
    tol = whole.error_bound + sum(p.error_bound for p in parts)
    return SerialCheck(res, tol, res >= -tol)


class DecompositionCheck(NamedTuple):
    residual: float
    bound: float
    slack: float
    passed: bool
    modules: dict


def _sub(q, a, b, label):
    return q.with_sides(a, b, label)


def decomposition_residual(q: QuadSpec, cut1, cut2, h: float) -> DecompositionCheck:
    """``m(Q) - m(Q12) - m(Q23) + m(Q2)`` against ``8.82 exp(-pi m(Q2))``."""
    c1, c2 = _as_sides(cut1), _as_sides(cut2)
    mods = {
        "Q": solve_module(q, h),
        "Q12": solve_module(_sub(q, q.side_a, c2, "Q12"), h),
        "Q23": solve_module(_sub(q, c1, q.side_b, "Q23"), h),
        "Q2": solve_module(_sub(q, c1, c2, "Q2"), h),
    }
    m2 = mods["Q2"].value
    if m2 < 3:
        raise PreconditionNotMet(f"m(Q2) = {m2:.4g} < 3")
    res = mods["Q"].value - mods["Q12"].value - mods["Q23"].value + m2
    bound = SHARP * math.exp(-math.pi * m2)
    slack = 2 * sum(m.error_bound for m in mods.values())
    return DecompositionCheck(res, bound, slack, abs(res) <= bound + slack, mods)


def symmetric_split_check(q: QuadSpec, cut, middle, h: float) -> DecompositionCheck:
    """One-sided check ``0 <= m(Q) - m(left) - m(right) <= 26.46 exp(-pi m(Q2))``.

    ``middle`` is a pair of crosscuts bounding the quadrilateral Q2 around ``cut``.
    """
    c = _as_sides(cut)
    mods = {
        "Q": solve_module(q, h),
        "left": solve_module(_sub(q, q.side_a, c, "left"), h),
        "right": solve_module(_sub(q, c, q.side_b, "right"), h),
        "Q2": solve_module(_sub(q, _as_sides(middle[0]), _as_sides(middle[1]), "Q2"), h),
    }
    m2 = mods["Q2"].value
    if m2 < 3:
        raise PreconditionNotMet(f"m(Q2) = {m2:.4g} < 3")
    res = mods["Q"].value - mods["left"].value - mods["right"].value
    bound = SYMMETRIC * math.exp(-math.pi * m2)
    slack = sum(m.error_bound for m in mods.values())
    return DecompositionCheck(res, bound, slack, -slack <= res <= bound + slack, mods)


def _as_sides(cut):
    if isinstance(cut, Side):
        return (cut,)
    return tuple(cut)


class TelescopingReport(NamedTuple):
    end_to_end: ModuleEstimate
    parts: list
    residual: float
    bound: float
    slack: float
    passed: bool


def telescoping_check(comb: QuadSpec, cuts, r_modules, h: float) -> TelescopingReport:
    """``0 <= m(comb) - sum m(parts) <= 26.46 sum exp(-pi m(R_j)) + slack``.

    ``cuts`` are crosscuts ordered from side A to side B; part j runs
    between consecutive cuts.
    """
    whole = solve_module(comb, h)
    chain = [comb.side_a] + [_as_sides(c) for c in cuts] + [comb.side_b]
    parts = [solve_module(_sub(comb, a, b, f"part{k}"), h)
             for k, (a, b) in enumerate(zip(chain, chain[1:]))]
    res = whole.value - sum(p.value for p in parts)
    bound = SYMMETRIC * sum(math.exp(-math.pi * m) for m in r_modules)
    slack = whole.error_bound + sum(p.error_bound for p in parts)
    return TelescopingReport(whole, parts, res, bound, slack, -slack <= res <= bound + slack)
