"""omega / e^{-d} on level sets: bounded for the sector, growing for both counterexamples."""
import math

from hypgauge.experiments import audit_inequalities, ratio_scan
from hypgauge.wos import WosConfig

cfg = WosConfig(samples=4000, seed=3)
for spec, alphas in ((f"sector:half={math.pi / 4!r}", [10, 1e3, 1e5]),
                     ("example2:n=4", None),
                     ("example1:n=3", None)):
    recs = ratio_scan(spec, alphas, cfg, bracket=False)
    print(spec)
    for r in recs:
        print(f"  alpha={r.alpha:.4g}  omega={r.omega.value:.3e}  d={r.d_green.value:.3f}  "
              f"ratio={r.ratio:.3f} +- {r.ratio_stderr:.2f}  components={r.n_components}  "
              f"[{r.method}]")
    rep = audit_inequalities(recs)
    print(f"  floor audit: {rep.passed} passed, {rep.failed} failed")
