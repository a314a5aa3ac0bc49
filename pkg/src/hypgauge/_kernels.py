"""Compiled inner loops: piece distances and walk-on-spheres stepping.

Pieces and gates are packed into float64 rows ``[kind, p1, ..., p7]``:

====  =======  ==========================================
kind  name     parameters
====  =======  ==========================================
0     ray      cos(theta), sin(theta), r_start
1     arc      cx, cy, radius, angle_lo, span
2     segment  x1, y1, x2, y2
3     circle   cx, cy, radius
====  =======  ==========================================

Random numbers come from one SplitMix64 stream per walker, seeded from a
batch key and the walker index, so results do not depend on scheduling.
"""
import math

import numpy as np
from numba import njit

RAY, ARC, SEGMENT, CIRCLE = 0, 1, 2, 3
ROW = 8

TWO_PI = 2.0 * math.pi

BOUNDARY, GATE, TIMEOUT = 0, 1, 2

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def _next_uniform(state):
    # state is a length-1 uint64 array advanced in place
    state[0] = state[0] + _GOLDEN
    return float(_mix(state[0]) >> _S11) * _INV53


@njit(cache=True)
def point_piece(x, y, row):
    """Distance from (x, y) to one packed piece.

    Returns ``(dist, px, py, param, side)`` where ``(px, py)`` is the nearest
    point, ``param`` locates it on the piece (radius along a ray, angle on an
    arc or circle, fraction along a segment) and ``side`` is +1/-1.
    """
    kind = int(row[0])
    if kind == RAY:
        c, s, r0 = row[1], row[2], row[3]
        t = x * c + y * s
        cross = c * y - s * x
        side = 1.0 if cross >= 0.0 else -1.0
        if t >= r0:
            return abs(cross), t * c, t * s, t, side
        px, py = r0 * c, r0 * s
        return math.hypot(x - px, y - py), px, py, r0, side
    if kind == ARC:
        cx, cy, rad, lo, span = row[1], row[2], row[3], row[4], row[5]
        dx, dy = x - cx, y - cy
        rho = math.hypot(dx, dy)
        phi = math.atan2(dy, dx)
        t = (phi - lo) % TWO_PI
        side = 1.0 if rho >= rad else -1.0
        if t <= span:
            ang = lo + t
            return abs(rho - rad), cx + rad * math.cos(ang), cy + rad * math.sin(ang), ang, side
        ax, ay = cx + rad * math.cos(lo), cy + rad * math.sin(lo)
        bx, by = cx + rad * math.cos(lo + span), cy + rad * math.sin(lo + span)
        da = math.hypot(x - ax, y - ay)
        db = math.hypot(x - bx, y - by)
        if da <= db:
            return da, ax, ay, lo, side
        return db, bx, by, lo + span, side
    if kind == SEGMENT:
        x1, y1, x2, y2 = row[1], row[2], row[3], row[4]
        ux, uy = x2 - x1, y2 - y1
        ll = ux * ux + uy * uy
        t = ((x - x1) * ux + (y - y1) * uy) / ll
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        px, py = x1 + t * ux, y1 + t * uy
        side = 1.0 if ux * (y - y1) - uy * (x - x1) >= 0.0 else -1.0
        return math.hypot(x - px, y - py), px, py, t, side
    # circle
    cx, cy, rad = row[1], row[2], row[3]
    dx, dy = x - cx, y - cy
    rho = math.hypot(dx, dy)
    phi = math.atan2(dy, dx)
    side = 1.0 if rho >= rad else -1.0
    return abs(rho - rad), cx + rad * math.cos(phi), cy + rad * math.sin(phi), phi, side


@njit(cache=True)
def nearest(x, y, pieces):
    best = np.inf
    idx = -1
    for k in range(pieces.shape[0]):
        d = point_piece(x, y, pieces[k])[0]
        if d < best:
            best = d
            idx = k
    return best, idx


@njit(cache=True)
def distances(xs, ys, pieces):
    out = np.empty(xs.shape[0])
    for i in range(xs.shape[0]):
        out[i] = nearest(xs[i], ys[i], pieces)[0]
    return out


@njit(cache=True)
def project(xs, ys, idx, pieces):
    """Nearest point, parameter and side of each point on its piece ``idx``."""
    n = xs.shape[0]
    px = np.empty(n)
    py = np.empty(n)
    par = np.empty(n)
    side = np.empty(n)
    for i in range(n):
        if idx[i] < 0:
            px[i] = xs[i]
            py[i] = ys[i]
            par[i] = np.nan
            side[i] = 0.0
            continue
        _, a, b, c, s = point_piece(xs[i], ys[i], pieces[idx[i]])
        px[i] = a
        py[i] = b
        par[i] = c
        side[i] = s
    return px, py, par, side


@njit(cache=True)
def walk(xs, ys, pieces, gates, eps, max_steps, cap_factor, ox, oy, key):
    """Run one walk on spheres from each start point.

    A walk stops when it comes within ``eps * max(1, |z|)`` of a piece
    (status BOUNDARY) or of a gate (status GATE), or after ``max_steps``
    (status TIMEOUT). Sphere radii never exceed ``cap_factor * max(1, |z - o|)``.
    """
    n = xs.shape[0]
    status = np.empty(n, np.int8)
    ex = np.empty(n)
    ey = np.empty(n)
    hit = np.empty(n, np.int32)
    nsteps = np.empty(n, np.int64)
    state = np.empty(1, np.uint64)
    ng = gates.shape[0]
    for i in range(n):
        state[0] = _mix(key + np.uint64(i) * _GOLDEN)
        x = xs[i]
        y = ys[i]
        st = TIMEOUT
        which = -1
        k = 0
        while k < max_steps:
            tol = eps * max(1.0, math.hypot(x, y))
            db, ib = nearest(x, y, pieces)
            if db <= tol:
                st = BOUNDARY
                which = ib
                break
            r = db
            if ng > 0:
                dg, ig = nearest(x, y, gates)
                if dg <= tol:
                    st = GATE
                    which = ig
                    break
                if dg < r:
                    r = dg
            cap = cap_factor * max(1.0, math.hypot(x - ox, y - oy))
            if r > cap:
                r = cap
            a = TWO_PI * _next_uniform(state)
            x += r * math.cos(a)
            y += r * math.sin(a)
            k += 1
        status[i] = st
        ex[i] = x
        ey[i] = y
        hit[i] = which
        nsteps[i] = k
    return status, ex, ey, hit, nsteps
