"""
Heat equation: spectral, collocation and finite differences
===========================================================

A manufactured solution ``exp(-t) (1 - r^2)(1 - z^2)`` is advanced with three
solvers and compared with the exact values.  The spectral and collocation
runs use BDF4 with ``h = 0.01``; finite differences use backward Euler with
six large steps to the same final time.
"""

###########################################################################
# Imports and the shared problem.

import time

import numpy as np

from cylspec import FDGrid, GridSpec, HeatConfig, collocation_heat_run, fd_heat_run, heat_run
from cylspec.grid import grid_mesh
from cylspec.manufactured import heat_exact, heat_forcing, heat_problem

STEPS, H = 50, 0.01


def initial(R, Z, T):
    return heat_exact(R, Z, T, 0.0)


def forcing(R, Z, T, t):
    return heat_forcing(R, Z, T, t)


def rel_error(values, R, Z, T, t):
    ref = heat_exact(R, Z, T, t)
    return np.max(np.abs(values - ref)) / np.max(np.abs(ref))


###########################################################################
# Spectral and collocation runs on the same CCF grids.

print(f"{'method':<18}{'N':>8}{'max rel error':>16}{'seconds':>10}")
for size in (7, 11, 15):
    spec = GridSpec(size, size, size)
    R, Z, T = grid_mesh(spec)
    init, g, _ = heat_problem(spec)

    t0 = time.perf_counter()
    traj = heat_run(HeatConfig(h=H, order=4, forcing_mode="exact"), init, g, steps=STEPS, output_every=STEPS)
    sec = time.perf_counter() - t0
    err = rel_error(traj.fields[-1].values, R, Z, T, traj.times[-1])
    print(f"{'spectral':<18}{spec.N:>8}{err:>16.2e}{sec:>10.2f}")

    t0 = time.perf_counter()
    traj = collocation_heat_run(spec, 1.0, H, initial, forcing, steps=STEPS, output_every=STEPS)
    sec = time.perf_counter() - t0
    err = rel_error(traj.fields[-1], R, Z, T, traj.times[-1])
    print(f"{'collocation':<18}{spec.N:>8}{err:>16.2e}{sec:>10.2f}")

###########################################################################
# Finite differences need far more points and remain orders of magnitude less accurate.

for size in (21, 41):
    grid = FDGrid(size, size, size)
    R, Z, T = grid.mesh()
    t0 = time.perf_counter()
    traj = fd_heat_run(grid, 1.0, STEPS * H / 6, initial, forcing, steps=6, output_every=6)
    sec = time.perf_counter() - t0
    err = rel_error(traj.fields[-1], R, Z, T, traj.times[-1])
    print(f"{'finite difference':<18}{grid.N:>8}{err:>16.2e}{sec:>10.2f}")
