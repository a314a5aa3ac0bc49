"""Walk-on-spheres harmonic measure and Green's-function distances against exact values."""
import math

import numpy as np

from hypgauge.domains import slit_disk, unit_disk
from hypgauge.exact import bn_lower_bound
from hypgauge.wos import BoundaryTarget, WosConfig, harmonic_measure, hyperbolic_distance_base

cfg = WosConfig(samples=50_000, seed=1)
for length in (math.pi / 4, math.pi / 2):
    est = harmonic_measure(unit_disk(), 0j, BoundaryTarget.arc(0, 0.0, length), cfg)
    print(f"disk arc of length {length:.4f}: {est.value:.4f} +- {est.stderr:.4f} "
          f"(exact {length / (2 * math.pi):.4f})")

est = harmonic_measure(slit_disk(0.5), 0j, BoundaryTarget.pieces(1), cfg)
print(f"slit disk r0=0.5: {est.value:.4f} +- {est.stderr:.4f} (exact {bn_lower_bound(0.5):.4f})")

pts = 0.5 * np.exp(2j * np.pi * np.arange(16) / 16)
d = hyperbolic_distance_base(unit_disk(), 0j, pts, WosConfig(samples=20_000, seed=2))
print(f"disk d(0, |z|=1/2): {d.value:.4f} +- {d.stderr:.4f} (exact {math.log(3):.4f})")
