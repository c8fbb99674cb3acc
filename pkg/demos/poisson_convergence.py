"""
Spectral convergence of the Poisson solver
==========================================

The exact solution mixes an axisymmetric part with a ``cos(theta)`` part and
is not a polynomial, so the error falls geometrically with the Chebyshev
degree until it meets rounding error.
"""

###########################################################################
# Solve on a sequence of grids.

import numpy as np

from cylspec import GridField, GridSpec, analyze, solve_poisson_3d, synthesize
from cylspec.grid import grid_mesh
from cylspec.manufactured import poisson_exact, poisson_rhs

print(f"{'m = n':>6}{'max error':>14}")
for size in (8, 12, 16, 20, 24):
    spec = GridSpec(size, size, 8)
    R, Z, T = grid_mesh(spec)
    u = solve_poisson_3d(analyze(GridField(spec, poisson_rhs(R, Z, T))))
    err = np.max(np.abs(synthesize(u, real=True).values - poisson_exact(R, Z, T)))
    print(f"{size:>6}{err:>14.2e}")

###########################################################################
# The coefficients of the solution show the same decay directly.

spec = GridSpec(24, 24, 8)
R, Z, T = grid_mesh(spec)
coeffs = analyze(GridField(spec, poisson_exact(R, Z, T))).data
radial = np.max(np.abs(coeffs), axis=(0, 1))
print("largest |coefficient| per radial degree:")
print(" ".join(f"{c:.0e}" for c in radial))
