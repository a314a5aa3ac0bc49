"""Ratio scans ``omega(0, F_alpha) / exp(-d(0, F_alpha))``, inequality audits,
the truncated Hardy integral and the config-file driver."""
from __future__ import annotations

import csv
import io
import json
import math
import platform
import shlex
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from .domains import (
    EXAMPLE2_POLE_RADIUS, build_domain, example1_default_alphas, example1_probe,
    example1_forward_gates, example1_reverse_gates, example2_alpha, example2_forward_gates,
    example2_reverse_gates, parse_domain, sector_gates, slit_disk, unit_disk,
)
from .errors import ConfigParse, DomainError, GraphTooLarge, HypgaugeError, InsufficientGrid
from .geometry import AngularInterval, Segment, circle_components, distance_to_boundary
from .quasihyperbolic import hyperbolic_bracket, quasihyp_distance
from .wos import (
    BoundaryTarget, Estimate, GateSequence, WosConfig, green, green_split,
    harmonic_measure, harmonic_measure_split, hyperbolic_distance_base,
)

CSV_HEADER = ["alpha", "omega", "omega_stderr", "d_green", "d_stderr",
              "delta_lo", "delta_hi", "ratio", "n_components"]
FLOOR = 2 / math.pi
GEODESIC_UPPER = 4 / math.pi
MIN_HITS = 100
BRACKET_NODES = 200_000
BRACKET_LEVELS = 1
NAN = float("nan")


@dataclass(frozen=True)
class RatioRecord:
    alpha: float
    omega: Estimate
    d_green: Estimate
    delta_bracket: tuple
    ratio: float
    n_components: int
    geodesic_like: bool = field(default=False, compare=False)
    method: str = field(default="", compare=False)

    @property
    def ratio_stderr(self) -> float:
        """Delta-method error of ``omega * exp(d)``."""
        w, d = self.omega, self.d_green
        if w.value <= 0:
            return math.inf
        return self.ratio * math.hypot(w.stderr / w.value, d.stderr)

    @property
    def has_bracket(self) -> bool:
        return all(math.isfinite(x) for x in self.delta_bracket)

    def row(self):
        lo, hi = self.delta_bracket
        return (float(self.alpha), float(self.omega.value), float(self.omega.stderr),
                float(self.d_green.value), float(self.d_green.stderr), float(lo), float(hi),
                float(self.ratio), int(self.n_components))

    def to_dict(self):
        out = dict(zip(CSV_HEADER, self.row()))
        out.update(omega_samples=self.omega.samples, d_samples=self.d_green.samples,
                   seed=self.omega.seed, geodesic_like=self.geodesic_like, method=self.method)
        return out


def make_record(alpha, omega, d, bracket=(NAN, NAN), n_components=1, **kw) -> RatioRecord:
    ratio = omega.value / math.exp(-d.value)
    return RatioRecord(float(alpha), omega, d, tuple(bracket), ratio, int(n_components), **kw)


# --- per-family plans ------------------------------------------------------------

@dataclass
class _Plan:
    z0: complex
    target: BoundaryTarget
    gates: Optional[list]  # forward gates for splitting, None when unavailable
    candidates: list
    green_fn: Callable
    geodesic_like: bool = False
    omega_dom: object = None  # domain for omega, if not the scanned one
    d_dom: object = None  # domain for d and the bracket


def _plan(spec, dom, alpha, cfg) -> _Plan:
    fam, p = spec.family, spec.params
    z0 = dom.basepoint
    level = BoundaryTarget.level(alpha)
    if fam == "example1":
        def gfn(w, c):
            if abs(w) < 2.0:
                return green(dom, z0, w, c)
            return green_split(dom, z0, w, GateSequence(example1_reverse_gates(w)), c,
                               pole_radius=0.5)
        return _Plan(z0, level, example1_forward_gates(alpha), example1_probe(alpha), gfn)
    if fam == "example2":
        def gfn(w, c):
            return green_split(dom, z0, w, GateSequence(example2_reverse_gates(alpha=abs(w))), c,
                               pole_radius=EXAMPLE2_POLE_RADIUS)
        return _Plan(z0, level, example2_forward_gates(alpha=alpha), [complex(alpha)], gfn)
    if fam == "sector":
        def gfn(w, c):
            r = abs(w)
            if r < 3.0:
                return green(dom, z0, w, c)
            gates = sector_gates(r, 1.5) + [AngularInterval.full(1.5)]
            return green_split(dom, z0, w, GateSequence(gates), c, pole_radius=0.35)
        fwd = sector_gates(1.0, alpha) if alpha > 2.0 else None
        return _Plan(z0, level, fwd, [complex(alpha)], gfn)
    if fam == "slitdisk":
        # alpha is the slit tip r0: omega of E* = [-1, -r0] in the slit disk
        # against the disk distance from 0 to E*, the extremal configuration
        if not 0 < alpha < 1:
            raise DomainError("slit-disk tips need 0 < r0 < 1")
        sd, disk = slit_disk(alpha), unit_disk()

        def gfn(w, c):
            return green(disk, 0j, w, c)
        return _Plan(0j, BoundaryTarget.pieces(1), None, [complex(-alpha)], gfn,
                     omega_dom=sd, d_dom=disk)
    if fam == "strip":
        # alpha is the height c of the basepoint; the target is the real axis
        if not 0 < alpha < 1:
            raise DomainError("strip heights need 0 < c < 1")
        L = dom.meta["length"]
        z0 = complex(0.0, alpha)
        tgt = BoundaryTarget.curve(Segment(complex(-L, 0), complex(L, 0)))

        def gfn(w, c):
            return green(dom, z0, w, c)
        return _Plan(z0, tgt, None, [0j], gfn, geodesic_like=True)
    raise DomainError(f"no ratio-scan plan for {fam}")


def default_alphas(spec) -> list:
    spec = parse_domain(spec) if isinstance(spec, str) else spec
    p = spec.params
    if spec.family == "example1":
        return example1_default_alphas(p["n"])
    if spec.family == "example2":
        return [example2_alpha(n) for n in range(1, min(p["n"], 4))]
    if spec.family == "sector":
        return [10.0 ** k for k in range(1, 6)]
    if spec.family == "slitdisk":
        return [p["r0"]]
    return [p["c"]]


def _bracket(dom, z0, w):
    try:
        res = quasihyp_distance(dom, z0, w, levels=BRACKET_LEVELS, max_nodes=BRACKET_NODES)
    except (GraphTooLarge, HypgaugeError):
        return NAN, NAN
    return hyperbolic_bracket(res.delta_upper)


def scan_one(spec, dom, alpha, cfg: WosConfig, stream=0, bracket=True) -> RatioRecord:
    plan = _plan(spec, dom, alpha, cfg)
    met = "plain"
    wdom = plan.omega_dom or dom
    ddom = plan.d_dom or dom
    omega = harmonic_measure(wdom, plan.z0, plan.target, cfg, stream=2 * stream)
    if omega.value * omega.samples < MIN_HITS and plan.gates:
        omega = harmonic_measure_split(wdom, plan.z0, plan.target, GateSequence(plan.gates), cfg,
                                       stream=2 * stream + 1)
        met = "split"
    dcfg = replace(cfg, seed=cfg.seed + 7919 * (stream + 1))
    d = hyperbolic_distance_base(ddom, plan.z0, plan.candidates, dcfg, green_fn=plan.green_fn)
    if spec.family in ("strip", "slitdisk"):
        ncomp = 1
    else:
        ncomp = len(circle_components(dom, alpha))
    br = _bracket(ddom, plan.z0, d.detail["point"]) if bracket else (NAN, NAN)
    return make_record(alpha, omega, d, br, ncomp, geodesic_like=plan.geodesic_like, method=met)


def ratio_scan(domain_spec, alphas=None, cfg: Optional[WosConfig] = None, bracket=True,
               sink: Optional[Callable] = None) -> list:
    """One record per alpha, in increasing alpha; ``sink`` receives each record
    as soon as it is ready so partial results survive a later failure."""
    spec = parse_domain(domain_spec) if isinstance(domain_spec, str) else domain_spec
    cfg = cfg or WosConfig()
    if spec.family in ("example2",):
        cfg = replace(cfg, eps_shell=min(cfg.eps_shell, 1e-9))
    dom = build_domain(spec)
    alphas = sorted(float(a) for a in (alphas if alphas else default_alphas(spec)))
    if any(not a > 0 for a in alphas):
        raise DomainError("alphas must be positive")
    out = []
    for k, a in enumerate(alphas):
        rec = scan_one(spec, dom, a, cfg, stream=k, bracket=bracket)
        out.append(rec)
        if sink is not None:
            sink(rec)
    return out


# --- audit ---------------------------------------------------------------------------

@dataclass
class AuditReport:
    rows: list  # (alpha, check, passed, lhs, rhs)
    passed: int
    failed: int

    @property
    def ok(self):
        return self.failed == 0

    def __str__(self):
        lines = [f"{'PASS' if ok else 'FAIL'} {chk} alpha={a:.6g} lhs={l:.6g} rhs={r:.6g}"
                 for a, chk, ok, l, r in self.rows]
        lines.append(f"{self.passed} passed, {self.failed} failed")
        return "\n".join(lines)


def audit_inequalities(records) -> AuditReport:
    """The floor ``omega >= (2/pi) e^{-d}`` with 3 sigma slack on each record,
    and the two-sided geodesic check ``e^{-d} <= omega <= (4/pi) e^{-d}`` on
    records flagged geodesic-like."""
    records = list(records)
    if not records:
        raise DomainError("no records to audit")
    rows = []
    for r in records:
        w, sw, d, sd = r.omega.value, r.omega.stderr, r.d_green.value, r.d_green.stderr
        lhs, rhs = w + 3 * sw, FLOOR * math.exp(-(d - 3 * sd))
        rows.append((r.alpha, "floor", bool(w > 0 and lhs >= rhs), lhs, rhs))
        if r.geodesic_like:
            lhs, rhs = w + 3 * sw, math.exp(-(d + 3 * sd))
            rows.append((r.alpha, "geodesic-lower", bool(lhs >= rhs), lhs, rhs))
            lhs, rhs = w - 3 * sw, GEODESIC_UPPER * math.exp(-(d - 3 * sd))
            rows.append((r.alpha, "geodesic-upper", bool(lhs <= rhs), lhs, rhs))
    npass = sum(1 for row in rows if row[2])
    return AuditReport(rows, npass, len(rows) - npass)


# --- Hardy-type integral ----------------------------------------------------------

def _trapz(y, x):
    return float(np.trapezoid(y, x) if hasattr(np, "trapezoid") else np.trapz(y, x))


def _decade_integral(a, f, lo, hi, m=400):
    """Integral over [lo, hi] of the log-log interpolant of f (linear if f has zeros)."""
    t = np.geomspace(lo, hi, m)
    if np.all(f > 0):
        vals = np.exp(np.interp(np.log(t), np.log(a), np.log(f)))
    else:
        vals = np.interp(t, a, f)
    return _trapz(vals, t)


def hardy_integral(p: float, records, tol: float = 0.1):
    """Trapezoid value of ``int alpha^(p-1) omega(alpha) d alpha`` over the record
    grid and a classification of its last decade against the one before."""
    if not p > 0:
        raise DomainError("p must be positive")
    recs = sorted(records, key=lambda r: r.alpha)
    if len(recs) < 4:
        raise InsufficientGrid(f"need at least 4 records, got {len(recs)}")
    a = np.array([r.alpha for r in recs])
    if a[0] < 1:
        raise DomainError("alphas must be >= 1")
    f = a ** (p - 1) * np.array([r.omega.value for r in recs])
    total = float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(a)))
    hi = a[-1]
    span = min(10.0, math.sqrt(hi / a[0]))
    last = _decade_integral(a, f, hi / span, hi)
    prev = _decade_integral(a, f, hi / span ** 2, hi / span)
    if last == 0 and prev == 0:
        trend = "flat"
    elif prev == 0 or last > (1 + tol) * prev:
        trend = "growing"
    elif last < (1 - tol) * prev:
        trend = "decaying"
    else:
        trend = "flat"
    return total, trend


# --- serialization -----------------------------------------------------------------

def _fmt(x):
    return str(x) if isinstance(x, (int, np.integer)) else "%.17g" % x


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([_fmt(v) for v in r.row()])
    return buf.getvalue()


def records_from_csv(text: str, flags=None) -> list:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != CSV_HEADER:
        raise DomainError("unexpected CSV header")
    out = []
    for k, row in enumerate(rows[1:]):
        if not row:
            continue
        a, w, sw, d, sd, lo, hi, ratio, nc = row
        geo = bool(flags[k]) if flags is not None and k < len(flags) else False
        out.append(RatioRecord(float(a), Estimate(float(w), float(sw), 0, 0),
                               Estimate(float(d), float(sd), 0, 0), (float(lo), float(hi)),
                               float(ratio), int(nc), geodesic_like=geo))
    return out


def records_to_json(records, **meta) -> str:
    return json.dumps({"meta": meta, "records": [r.to_dict() for r in records]}, indent=2,
                      allow_nan=True)


def read_records(path) -> list:
    """Records from a CSV file; geodesic flags come from a JSON twin when present."""
    path = Path(path)
    if path.suffix == ".json":
        data = json.loads(path.read_text())
        out = []
        for d in data["records"]:
            out.append(RatioRecord(d["alpha"], Estimate(d["omega"], d["omega_stderr"],
                                                        d.get("omega_samples", 0), d.get("seed", 0)),
                                   Estimate(d["d_green"], d["d_stderr"], d.get("d_samples", 0),
                                            d.get("seed", 0)),
                                   (d["delta_lo"], d["delta_hi"]), d["ratio"], d["n_components"],
                                   geodesic_like=d.get("geodesic_like", False),
                                   method=d.get("method", "")))
        return out
    twin = path.with_suffix(".json")
    flags = None
    if twin.exists():
        flags = [d.get("geodesic_like", False) for d in json.loads(twin.read_text())["records"]]
    return records_from_csv(path.read_text(), flags)


def write_records(records, out, fmt="csv", **meta):
    """Write the table (CSV or JSON at ``out``) plus the other format alongside."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    csv_path = out if fmt == "csv" else out.with_suffix(".csv")
    json_path = out if fmt == "json" else out.with_suffix(".json")
    csv_path.write_text(records_to_csv(records))
    json_path.write_text(records_to_json(records, **meta))
    return csv_path, json_path


# --- config-driven runs --------------------------------------------------------------

CONFIG_KEYS = {
    "experiment": str, "domain": str, "alphas": str, "samples": int, "seed": int,
    "out": str, "format": str, "eps_shell": float, "max_steps": int, "bracket": str,
    "p": float, "input": str, "quad": str, "h": float,
}
EXPERIMENTS = ("ratio_scan", "audit", "hardy", "module")


def parse_config(text: str) -> dict:
    """``key=value`` tokens (several per line allowed), ``#`` starts a comment."""
    conf, where = {}, {}
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            toks = shlex.split(line)
        except ValueError as exc:
            raise ConfigParse(str(exc), ln) from None
        for tok in toks:
            key, eq, val = tok.partition("=")
            key = key.strip()
            if not eq:
                raise ConfigParse(f"expected key=value, got {tok!r}", ln)
            if key not in CONFIG_KEYS:
                raise ConfigParse(f"unknown key {key!r}", ln)
            try:
                conf[key] = CONFIG_KEYS[key](val.strip())
                where[key] = ln
            except ValueError:
                raise ConfigParse(f"bad value {val!r} for {key!r}", ln) from None
    if "experiment" not in conf:
        raise ConfigParse("missing key 'experiment'")
    if conf["experiment"] not in EXPERIMENTS:
        raise ConfigParse(f"unknown experiment {conf['experiment']!r}", where["experiment"])
    return conf


def parse_alphas(text):
    if text is None or text.strip() in ("", "auto"):
        return None
    return [float(t) for t in text.split(",") if t.strip()]


def _manifest(conf, timings, outputs):
    import numba
    import scipy
    return {"config": conf, "seed": conf.get("seed", 0), "timings": timings,
            "outputs": [str(o) for o in outputs],
            "versions": {"hypgauge": __version__, "python": platform.python_version(),
                         "numpy": np.__version__, "scipy": scipy.__version__,
                         "numba": numba.__version__}}


def run(config_file, log=print) -> int:
    """Execute the pipeline named in a config file; returns a process exit code."""
    from .modules import QuadSpec, solve_module
    path = Path(config_file)
    conf = parse_config(path.read_text())
    exp = conf["experiment"]
    t0 = time.perf_counter()
    timings, outputs, code = {}, [], 0
    out = Path(conf.get("out", path.with_suffix("").name + "_out.csv"))
    if not out.is_absolute():
        out = path.parent / out
    need = {"ratio_scan": "domain", "audit": "input", "hardy": "input", "module": "quad"}[exp]
    if need not in conf:
        raise ConfigParse(f"{exp} needs {need!r}")
    if exp == "ratio_scan":
        cfg = WosConfig(samples=conf.get("samples", 10_000), seed=conf.get("seed", 0),
                        eps_shell=conf.get("eps_shell", 1e-6),
                        max_steps=conf.get("max_steps", 100_000))
        recs = ratio_scan(conf["domain"], parse_alphas(conf.get("alphas")), cfg,
                          bracket=conf.get("bracket", "true").lower() in ("1", "true", "yes"))
        outputs += write_records(recs, out, conf.get("format", "csv"), domain=conf["domain"],
                                 samples=cfg.samples, seed=cfg.seed)
        code = 0 if audit_inequalities(recs).ok else 2
    elif exp == "audit":
        rep = audit_inequalities(read_records(path.parent / conf["input"]))
        log(str(rep))
        out = out.with_suffix(".txt")
        out.write_text(str(rep) + "\n")
        outputs.append(out)
        code = 0 if rep.ok else 2
    elif exp == "hardy":
        total, trend = hardy_integral(conf.get("p", 0.25), read_records(path.parent / conf["input"]))
        out = out.with_suffix(".json")
        out.write_text(json.dumps({"p": conf.get("p", 0.25), "integral": total, "trend": trend}))
        log(f"integral={total:.17g} trend={trend}")
        outputs.append(out)
    else:
        q = QuadSpec.loads((path.parent / conf["quad"]).read_text())
        est = solve_module(q, conf.get("h", 0.05))
        out = out.with_suffix(".json")
        out.write_text(json.dumps({"module": est.value, "error_bound": est.error_bound,
                                   "grid_h": est.grid_h}))
        log(f"module={est.value:.12g} +- {est.error_bound:.2g}")
        outputs.append(out)
    timings["total_s"] = time.perf_counter() - t0
    man = out.with_suffix(".manifest.json")
    man.write_text(json.dumps(_manifest(conf, timings, outputs), indent=2))
    return code
