"""Conformal modules of rectilinear quadrilaterals and the comb decompositions."""
import math

from hypgauge.domains import comb_quadrilateral
from hypgauge.modules import QuadSpec, decomposition_residual, solve_module, telescoping_check

for q, exact in ((QuadSpec.rectangle(1, 1), 1.0), (QuadSpec.rectangle(2, 1), 2.0),
                 (QuadSpec.rectangle(1.5 * math.pi, 0.5 * math.pi), 3.0)):
    est = solve_module(q, 1 / 32 if exact < 3 else math.pi / 32)
    print(f"{q.x1:.3f} x {q.y1:.3f}: m={est.value:.8f} +- {est.error_bound:.1e} (exact {exact})")

h = math.pi / 32
c = comb_quadrilateral(1)
dec = decomposition_residual(c.quad, c.ells[0], c.gammas[0], h)
print("comb n=1 modules:", {k: round(v.value, 6) for k, v in dec.modules.items()})
print(f"  residual {dec.residual:.2e}, bound {dec.bound:.2e}, FD slack {dec.slack:.1e}")
for n in (1, 2):
    c = comb_quadrilateral(n)
    rep = telescoping_check(c.quad, c.gammas, c.r_modules, h)
    print(f"telescoping n={n}: end-to-end {rep.end_to_end.value:.6f}, "
          f"parts {[round(p.value, 6) for p in rep.parts]}, residual {rep.residual:.1e}, "
          f"{'PASS' if rep.passed else 'FAIL'}")
