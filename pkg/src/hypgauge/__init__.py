"""hypgauge: harmonic measure, Green's functions, hyperbolic and
quasi-hyperbolic distances and conformal modules on planar slit domains."""
__version__ = "0.1.0"
