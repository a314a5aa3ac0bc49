"""``hypgauge`` command line: ratio scans, audits, modules, Hardy integrals, config runs."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import HypgaugeError

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


def _ratio_scan(a):
    from .experiments import audit_inequalities, parse_alphas, ratio_scan, write_records
    from .wos import WosConfig
    cfg = WosConfig(samples=a.samples, seed=a.seed, eps_shell=a.eps_shell)
    done = []

    def sink(rec):
        done.append(rec)
        # keep whatever finished if a later alpha fails
        write_records(done, a.out, a.format, domain=a.domain, samples=a.samples, seed=a.seed)
        print(f"alpha={rec.alpha:.6g} omega={rec.omega.value:.6g} d={rec.d_green.value:.6g} "
              f"ratio={rec.ratio:.6g}", flush=True)

    recs = ratio_scan(a.domain, parse_alphas(a.alphas), cfg, bracket=not a.no_bracket, sink=sink)
    rep = audit_inequalities(recs)
    return EXIT_OK if rep.ok else EXIT_FAIL


def _audit(a):
    from .experiments import audit_inequalities, read_records
    rep = audit_inequalities(read_records(a.inp))
    print(rep)
    return EXIT_OK if rep.ok else EXIT_FAIL


def _read_cuts(path):
    from .modules import Side
    cuts = []
    for ln, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].split()
        if not line:
            continue
        if line[0] != "cut" or len(line) != 5:
            raise HypgaugeError(f"{path}:{ln}: expected 'cut x1 y1 x2 y2'")
        x1, y1, x2, y2 = map(float, line[1:])
        cuts.append(Side(complex(x1, y1), complex(x2, y2)))
    if len(cuts) != 2:
        raise HypgaugeError(f"{path}: need exactly two cuts, got {len(cuts)}")
    return cuts


def _module(a):
    from .modules import QuadSpec, decomposition_residual, solve_module
    q = QuadSpec.loads(Path(a.quad).read_text(), label=Path(a.quad).stem)
    if a.decompose is None:
        est = solve_module(q, a.h)
        print(f"module={est.value:.12g} error_bound={est.error_bound:.3g} h={est.grid_h:g}")
        return EXIT_OK
    c1, c2 = _read_cuts(a.decompose)
    chk = decomposition_residual(q, c1, c2, a.h)
    mods = " ".join(f"{k}={v.value:.10g}" for k, v in chk.modules.items())
    print(f"{'PASS' if chk.passed else 'FAIL'} residual={chk.residual:.3g} "
          f"bound={chk.bound:.3g} slack={chk.slack:.3g} {mods}")
    return EXIT_OK if chk.passed else EXIT_FAIL


def _hardy(a):
    from .experiments import hardy_integral, read_records
    total, trend = hardy_integral(a.p, read_records(a.inp))
    print(json.dumps({"p": a.p, "integral": total, "trend": trend}))
    return EXIT_OK


def _run(a):
    from .experiments import run
    return run(a.config)


def build_parser():
    p = argparse.ArgumentParser(prog="hypgauge", description=__doc__)
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("ratio-scan", help="omega / exp(-d) over a grid of levels")
    s.add_argument("--domain", required=True, help="e.g. example1:n=3, sector:half=0.785")
    s.add_argument("--alphas", default="auto", help="comma list or 'auto'")
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--eps-shell", type=float, default=1e-6)
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--no-bracket", action="store_true", help="skip quasi-hyperbolic brackets")
    s.set_defaults(func=_ratio_scan)

    s = sub.add_parser("audit", help="check the inequality floor on a record table")
    s.add_argument("--in", dest="inp", required=True)
    s.set_defaults(func=_audit)

    s = sub.add_parser("module", help="conformal module of a rectilinear quadrilateral")
    s.add_argument("--quad", required=True)
    s.add_argument("--decompose", help="file with two 'cut x1 y1 x2 y2' lines")
    s.add_argument("--h", type=float, default=1 / 64)
    s.set_defaults(func=_module)

    s = sub.add_parser("hardy", help="truncated integral of alpha^(p-1) omega")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--in", dest="inp", required=True)
    s.set_defaults(func=_hardy)

    s = sub.add_parser("run", help="run a key=value config file")
    s.add_argument("config")
    s.set_defaults(func=_run)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (HypgaugeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
