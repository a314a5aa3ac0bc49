"""Walk-on-spheres estimators: harmonic measure, Green's function, and the
hyperbolic distance obtained from it, with fixed-effort multilevel splitting
for exponentially small quantities.

Every walk draws from its own counter-seeded stream, keyed by
``(seed, stream, batch)`` through :class:`numpy.random.SeedSequence`, so an
estimate is a pure function of its inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels as K
from .errors import (CoincidentPoints, DomainError, GateOrderInvalid, NonConvergence,
                     NonInteriorStart, ZeroSurvivors)
from .exact import green_to_hyperbolic
from .geometry import AngularInterval, Circle, Segment, SlitDomain, distance_to_boundary, pack

#: walks that time out on more than this fraction of samples abort the estimate
TIMEOUT_FRACTION = 1e-3


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    samples: int
    seed: int
    detail: dict = field(default_factory=dict, compare=False, repr=False)

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class WosConfig:
    eps_shell: float = 1e-6
    max_steps: int = 100_000
    samples: int = 10_000
    seed: int = 0
    far_radius: Optional[float] = None
    cap_factor: float = 1e3
    batch_size: int = 1 << 16

    def __post_init__(self):
        if not self.eps_shell > 0:
            raise DomainError("eps_shell must be positive")
        if self.samples < 1 or self.max_steps < 1:
            raise DomainError("samples and max_steps must be positive")


@dataclass(frozen=True)
class TargetPart:
    """Boundary piece ``piece``, optionally restricted to ``lo <= parameter <= hi``
    and to one side (+1/-1) of a two-sided slit."""

    piece: int
    lo: Optional[float] = None
    hi: Optional[float] = None
    side: Optional[int] = None


@dataclass(frozen=True)
class BoundaryTarget:
    """Boundary set whose harmonic measure is sought.

    ``curves`` are adjoined to the boundary as absorbing target curves; this
    is how level sets ``{|z| = alpha}`` are targeted (the walk then lives in
    the component of the domain minus the curves that contains the start).
    """

    parts: tuple = ()
    curves: tuple = ()

    @classmethod
    def pieces(cls, *idx):
        return cls(tuple(TargetPart(i) for i in idx))

    @classmethod
    def arc(cls, piece, lo, hi, side=None):
        return cls((TargetPart(piece, lo, hi, side),))

    @classmethod
    def level(cls, alpha, center=0j):
        return cls((), (AngularInterval.full(alpha, center),))

    @classmethod
    def curve(cls, *curves):
        return cls((), tuple(curves))


@dataclass(frozen=True)
class GateSequence:
    """Interface curves crossed in order on every path from start to target."""

    gates: tuple = ()

    def __len__(self):
        return len(self.gates)


# --- low-level driver ---------------------------------------------------------

def _key(seed, stream, batch):
    ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, stream, batch])
    return ss.generate_state(1, dtype=np.uint64)[0]


def _run(pieces, gates, starts, cfg: WosConfig, stream: int, origin=0j):
    """Walk from each start point; returns a dict of per-walk arrays."""
    starts = np.asarray(starts, dtype=complex).ravel()
    n = starts.size
    out = {k: [] for k in ("status", "end", "hit", "steps")}
    for b, lo in enumerate(range(0, n, cfg.batch_size)):
        chunk = starts[lo:lo + cfg.batch_size]
        st, ex, ey, hit, steps = K.walk(
            np.ascontiguousarray(chunk.real), np.ascontiguousarray(chunk.imag),
            pieces, gates, cfg.eps_shell, cfg.max_steps, cfg.cap_factor,
            origin.real, origin.imag, _key(cfg.seed, stream, b))
        out["status"].append(st)
        out["end"].append(ex + 1j * ey)
        out["hit"].append(hit)
        out["steps"].append(steps)
    res = {k: np.concatenate(v) for k, v in out.items()}
    timeouts = int(np.count_nonzero(res["status"] == K.TIMEOUT))
    if timeouts > TIMEOUT_FRACTION * n:
        raise NonConvergence(f"{timeouts} of {n} walks exceeded {cfg.max_steps} steps")
    res["timeouts"] = timeouts
    return res


def _classify(res, pieces, target: BoundaryTarget):
    """Boolean mask of walks that ended on the target."""
    st, hit, end = res["status"], res["hit"], res["end"]
    ok = (st == K.GATE) if target.curves else np.zeros(st.shape, bool)
    if target.parts:
        on = st == K.BOUNDARY
        idx = np.where(on, hit, -1).astype(np.int32)
        _, _, par, side = K.project(end.real.copy(), end.imag.copy(), idx, pieces)
        for part in target.parts:
            m = on & (hit == part.piece)
            if part.lo is not None:
                p = par
                kind = int(pieces[part.piece, 0])
                if kind in (K.ARC, K.CIRCLE):
                    # compare angles modulo 2pi relative to lo
                    p = part.lo + (par - part.lo) % (2 * math.pi)
                m &= (p >= part.lo) & (p <= part.hi)
            if part.side is not None:
                m &= side == part.side
            ok |= m
    return ok


def _check_start(dom, z):
    z = complex(z)
    if not dom.contains(z):
        raise NonInteriorStart(f"{z} is not interior to {dom.label or 'the domain'}")
    return z


def _bernoulli(hits, n, seed, **detail):
    p = hits / n
    sd = math.sqrt(p * (1 - p) * n / (n - 1)) if n > 1 else 0.0
    return Estimate(p, sd / math.sqrt(n), n, seed, detail)


def _pieces_with_far(dom: SlitDomain, cfg: WosConfig):
    P = dom.packed
    if cfg.far_radius is not None:
        P = np.vstack([P, pack([Circle(0j, cfg.far_radius)])])
    return P


# --- harmonic measure ---------------------------------------------------------

def harmonic_measure(dom: SlitDomain, z0, target: BoundaryTarget, cfg: WosConfig,
                     stream: int = 0) -> Estimate:
    """Probability that Brownian motion from ``z0`` leaves through ``target``."""
    z0 = _check_start(dom, z0)
    P = dom.packed
    G = pack(target.curves) if target.curves else np.zeros((0, K.ROW))
    res = _run(P, G, np.full(cfg.samples, z0), cfg, stream, z0)
    ok = _classify(res, P, target)
    return _bernoulli(int(ok.sum()), cfg.samples, cfg.seed, timeouts=res["timeouts"],
                      mean_steps=float(res["steps"].mean()))


def _validate_gates(dom, z0, gates, final=()):
    curves = list(gates) + list(final)
    for k, g in enumerate(curves):
        if distance_to_boundary(z0, [g]) <= 0:
            raise GateOrderInvalid(f"start lies on gate {k}")
        if k + 1 < len(curves):
            nxt = curves[k + 1]
            if np.min(distance_to_boundary(_curve_points(nxt, 64), [g])) <= 0:
                raise GateOrderInvalid(f"gates {k} and {k + 1} intersect")


def _curve_points(c, n):
    if isinstance(c, AngularInterval):
        return c.points(n)
    if isinstance(c, Segment):
        t = (np.arange(n) + 0.5) / n
        return c.a + t * (c.b - c.a)
    raise TypeError(f"unsupported gate {c!r}")


def _splitting(dom, z0, gates, cfg, stream0):
    """Fixed-effort passage through ``gates``; returns (survivor points, probs)."""
    pos = np.full(cfg.samples, complex(z0))
    probs, counts = [], []
    P = _pieces_with_far(dom, cfg)
    for k, g in enumerate(gates):
        res = _run(P, pack([g]), pos, cfg, stream0 + k, z0)
        hit = res["status"] == K.GATE
        nh = int(hit.sum())
        if nh == 0:
            raise ZeroSurvivors(k)
        probs.append(nh / pos.size)
        counts.append(pos.size)
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, stream0 + k, 7]))
        pos = _balanced(res["end"][hit], cfg.samples, rng)
    return pos, probs, counts


def _balanced(points, n, rng):
    """Resample ``n`` starts from ``points``: each point gets ``n // m`` copies and
    the remainder goes to a random subset, so every point receives ``n / m``
    copies in expectation with minimal spread."""
    m = points.size
    reps = np.full(m, n // m)
    reps[rng.choice(m, size=n - reps.sum(), replace=False)] += 1
    return rng.permutation(np.repeat(points, reps))


def _product(probs, counts):
    est = float(np.prod(probs)) if probs else 1.0
    rel2 = sum((1 - p) / (p * n) for p, n in zip(probs, counts))
    return est, rel2


def harmonic_measure_split(dom: SlitDomain, z0, target: BoundaryTarget, gates: GateSequence,
                           cfg: WosConfig, stream: int = 0) -> Estimate:
    """Harmonic measure as a product of stage passage probabilities.

    Walkers reaching gate k are resampled uniformly back to ``cfg.samples``
    starts for stage k+1. With no gates this is :func:`harmonic_measure`.
    """
    z0 = _check_start(dom, z0)
    if not len(gates):
        return harmonic_measure(dom, z0, target, cfg, stream)
    _validate_gates(dom, z0, gates.gates)
    base = 1000 * (stream + 1)
    pos, probs, counts = _splitting(dom, z0, gates.gates, cfg, base)
    P = dom.packed
    G = pack(target.curves) if target.curves else np.zeros((0, K.ROW))
    res = _run(P, G, pos, cfg, base + len(gates.gates), z0)
    ok = _classify(res, P, target)
    nh = int(ok.sum())
    if nh == 0:
        raise ZeroSurvivors(len(gates.gates))
    probs.append(nh / pos.size)
    counts.append(pos.size)
    est, rel2 = _product(probs, counts)
    return Estimate(est, est * math.sqrt(rel2), cfg.samples, cfg.seed,
                    {"stage_probs": probs, "stages": len(probs)})


# --- Green's function ---------------------------------------------------------

def _exit_log_mean(P, starts, z0, cfg, stream):
    res = _run(P, np.zeros((0, K.ROW)), starts, cfg, stream, z0)
    idx = res["hit"].astype(np.int32)
    end = res["end"]
    px, py, _, _ = K.project(end.real.copy(), end.imag.copy(), idx, P)
    return np.log(np.abs(px + 1j * py - z0))


def green(dom: SlitDomain, z0, z, cfg: WosConfig, stream: int = 0) -> Estimate:
    """``g(z0, z) = -log|z - z0| + E_z log|B_tau - z0|`` from walks started at z.

    With ``cfg.far_radius`` the domain is cut by ``|w| < far_radius``; the
    result is then the Green's function of the smaller domain, a lower bound
    that increases with the radius.
    """
    z0 = _check_start(dom, z0)
    z = _check_start(dom, z)
    if z == z0:
        raise CoincidentPoints("Green's function is infinite at its pole")
    P = _pieces_with_far(dom, cfg)
    logs = _exit_log_mean(P, np.full(cfg.samples, z), z0, cfg, stream)
    n = logs.size
    val = -math.log(abs(z - z0)) + float(logs.mean())
    se = float(logs.std(ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return Estimate(val, se, n, cfg.seed)


def green_split(dom: SlitDomain, z0, z, gates: GateSequence, cfg: WosConfig,
                pole_radius: Optional[float] = None, stream: int = 0,
                inner_samples: int = 4) -> Estimate:
    """Green's function for a far point by splitting towards the pole.

    ``g(z0, z) = E_z[g(z0, B_T); T < tau]`` where T is the hitting time of
    the circle ``|w - z0| = pole_radius``. The gates lead from z to that
    circle; at each survivor g is estimated directly with ``inner_samples``
    walks.
    """
    z0 = _check_start(dom, z0)
    z = _check_start(dom, z)
    if z == z0:
        raise CoincidentPoints("Green's function is infinite at its pole")
    if pole_radius is None:
        pole_radius = 0.5 * distance_to_boundary(z0, dom)
    if pole_radius >= distance_to_boundary(z0, dom) or abs(z - z0) <= pole_radius:
        raise GateOrderInvalid("pole circle must sit inside the domain and exclude z")
    final = AngularInterval.full(pole_radius, z0)
    _validate_gates(dom, z, gates.gates, [final])
    base = 5000 + 1000 * stream
    walk_cfg = replace(cfg)
    pos, probs, counts = _splitting(dom, z, list(gates.gates) + [final], walk_cfg, base)
    # the last "gate" is the pole circle; values there come from direct walks
    P = _pieces_with_far(dom, cfg)
    starts = np.repeat(pos, inner_samples)
    logs = _exit_log_mean(P, starts, z0, cfg, base + 999).reshape(-1, inner_samples)
    gvals = -np.log(np.abs(pos - z0)) + logs.mean(axis=1)
    gm = float(gvals.mean())
    est, rel2 = _product(probs, counts)
    rel2 += float(gvals.var(ddof=1)) / (gm * gm * gvals.size)
    val = est * gm
    return Estimate(val, abs(val) * math.sqrt(rel2), cfg.samples, cfg.seed,
                    {"stage_probs": probs, "pole_green": gm})


# --- hyperbolic distance --------------------------------------------------------

def distance_from_green(g: Estimate) -> Estimate:
    """Propagate a Green's function estimate to ``d = -log tanh(g/2)``."""
    if not g.value > 0:
        raise NonConvergence(f"Green's function estimate {g.value} is not positive")
    d = green_to_hyperbolic(g.value)
    return Estimate(d, g.stderr / math.sinh(g.value), g.samples, g.seed,
                    dict(g.detail, green=g.value, green_stderr=g.stderr))


def hyperbolic_distance_base(dom: SlitDomain, z0, points: Sequence[complex], cfg: WosConfig,
                             green_fn: Optional[Callable] = None,
                             screen_samples: Optional[int] = None) -> Estimate:
    """``d_D(z0, set)`` via the largest Green's function value over ``points``.

    Candidates are screened by successive halving (keep the better half,
    double the screening samples) and a fresh, independent estimate is taken
    at the survivor, which avoids the upward bias of a maximum over noisy
    values.
    """
    pts = [complex(p) for p in points]
    if not pts:
        raise DomainError("candidate set is empty")
    if green_fn is None:
        def green_fn(w, c):
            return green(dom, z0, w, c)
    ns = screen_samples or max(256, cfg.samples // 16)
    rnd = 0
    while len(pts) > 1:
        scfg = replace(cfg, samples=ns, seed=cfg.seed ^ (0x5C5C + rnd))
        vals = np.array([green_fn(w, scfg).value for w in pts])
        order = np.argsort(-vals, kind="stable")
        pts = [pts[k] for k in order[:(len(pts) + 1) // 2]]
        ns, rnd = 2 * ns, rnd + 1
    best = pts[0]
    g = green_fn(best, cfg)
    d = distance_from_green(g)
    d.detail["point"] = best
    return d
