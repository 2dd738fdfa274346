"""Exact finite-dimensional model of Poisson transforms between the conformal
sphere and hyperbolic space for SO(n+1,1).

Everything is computed over the rationals; there is no floating point in the
core.
"""

__version__ = "0.1.0"
