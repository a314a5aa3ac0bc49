"""Closed forms: the floor (2/pi) e^{-d}, slit-disk extremals, strip geodesics, the sector oracle."""
import math

from hypgauge.exact import (bn_lower_bound, disk_hyperbolic_distance, radial_slit_measure,
                            sector_oracle, strip_line_measure, theorem_K)

print("slit disk: omega(0, [-1,-r0]) vs (2/pi) e^{-d}")
for r0 in (0.1, 0.5, 0.9):
    w = bn_lower_bound(r0)
    d = disk_hyperbolic_distance(0j, -r0)
    print(f"  r0={r0:.1f}  omega={w:.6f}  floor={2 / math.pi * math.exp(-d):.6f}")

print(f"radial slit measure at 1/40: {radial_slit_measure(1 / 40):.9f}")
print(f"strip line measure at c=1/2: {strip_line_measure(0.5)}")
print("K(c) for level sets within strip height c of the geodesic:")
for c in (0.1, 0.5, 0.9):
    print(f"  c={c}: K={theorem_K(c):.4f}")

print("quarter-plane sector, basepoint 1: omega / e^{-d} tends to 4/pi")
for a in (10, 1e3, 1e5):
    w, d = sector_oracle(math.pi / 4, 1.0, a)
    print(f"  alpha={a:g}: omega={w:.4e}  d={d:.4f}  ratio={w * math.exp(d):.6f}")
