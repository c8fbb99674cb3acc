"""Reference heat solvers: second-order finite differences and dense collocation.

Both exist to be compared against the spectral solver, so they favour plain
constructions over speed.

Finite differences
    Radial nodes ``r_i = (i + 1/2) dr`` with ``dr = 1 / (M - 1/2)``, so the
    last node sits on the wall and no node lies on the axis.  The radial
    operator is in flux form, and the ``r = 0`` face carries no flux.  ``z`` is
    equispaced with Dirichlet ends and ``theta`` periodic with the usual
    three-point stencil.  The periodic direction is diagonalised by a DFT,
    which is exact for that stencil, so the per-mode 2-D systems can be
    factorized once with a sparse LU and reused.  Time stepping is backward Euler.

Collocation
    Values on the CCF grid, dense Chebyshev differentiation matrices in ``r``
    and ``z`` and exact Fourier differentiation in ``theta``.  Each wavenumber
    gives a dense ``(m n) x (m n)`` matrix with Dirichlet rows, LU-factorized
    once per time-step size.  Stepping uses the same BDF schedule as
    :mod:`cylspec.timestep`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NumericalError
from .grid import GridSpec, grid_axes, grid_mesh
from .timestep import BDFScheme, Trajectory

__all__ = [
    "FDGrid",
    "FDHeatSolver",
    "fd_heat_run",
    "fd_poisson_solve",
    "chebyshev_diff_matrix",
    "CollocationHeatSolver",
    "collocation_heat_run",
]


# --------------------------------------------------------------------------
# finite differences


@dataclass(frozen=True)
class FDGrid:
    """``m`` radial nodes (last one on the wall), ``n`` nodes in ``z``, ``p`` angles."""

    m: int
    n: int
    p: int

    def __post_init__(self):
        if self.m < 3 or self.n < 3 or self.p < 3:
            raise ValueError("finite-difference grid needs at least 3 points per direction")

    @property
    def dr(self) -> float:
        return 1.0 / (self.m - 0.5)

    @property
    def r(self) -> np.ndarray:
        return (np.arange(self.m) + 0.5) * self.dr

    @property
    def z(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.n)

    @property
    def theta(self) -> np.ndarray:
        return -np.pi + 2 * np.pi * np.arange(self.p) / self.p

    @property
    def N(self) -> int:
        return self.m * self.n * self.p

    def mesh(self):
        """``(R, Z, T)`` arrays of shape ``(p, n, m)``, matching the spectral layout."""
        T, Z, R = np.meshgrid(self.theta, self.z, self.r, indexing="ij")
        return R, Z, T


def _radial_operator(grid: FDGrid, w: int) -> sp.csr_array:
    """Interior radial rows (nodes ``0..m-2``) of the flux-form modal operator."""
    m, dr = grid.m, grid.dr
    r = grid.r[:-1]
    rp = r + dr / 2
    rm = r - dr / 2
    main = -(rp + rm) / (r * dr * dr) - w * w / r**2
    up = rp[:-1] / (r[:-1] * dr * dr)
    lo = rm[1:] / (r[1:] * dr * dr)
    return sp.diags([lo, main, up], [-1, 0, 1], format="csr")


def _angular_symbol(grid: FDGrid) -> np.ndarray:
    """Eigenvalues of the periodic second difference in ``theta``, ordered like ``fftfreq``."""
    dth = 2 * np.pi / grid.p
    k = sfft.fftfreq(grid.p, 1.0 / grid.p)
    return -(4.0 / dth**2) * np.sin(k * dth / 2) ** 2


class FDHeatSolver:
    """Sparse LU factors of ``1 - scale * Laplacian_h`` for every angular mode."""

    def __init__(self, grid: FDGrid, scale: float):
        self.grid = grid
        self.scale = float(scale)
        m, n = grid.m, grid.n
        dz = 2.0 / (n - 1)
        Dzz = sp.diags([np.ones(n - 3), -2 * np.ones(n - 2), np.ones(n - 3)], [-1, 0, 1]) / dz**2
        Iz = sp.identity(n - 2)
        Ir = sp.identity(m - 1)
        r = grid.r[:-1]
        self._lu = []
        for sym in _angular_symbol(grid):
            # the angular stencil couples ``u_l`` through ``sym / r^2``; pass w=0 and add it
            lap = sp.kron(Iz, _radial_operator(grid, 0) + sp.diags(sym / r**2)) + sp.kron(Dzz, Ir)
            mat = sp.identity((m - 1) * (n - 2)) - self.scale * lap
            try:
                self._lu.append(spla.splu(sp.csc_matrix(mat)))
            except RuntimeError as exc:
                raise NumericalError(f"sparse LU failed: {exc}") from exc

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve on the ``(p, n, m)`` node array; wall values are returned as zero."""
        g = self.grid
        hat = sfft.fft(rhs[:, 1:-1, :-1], axis=0)
        out = np.empty_like(hat)
        for i, lu in enumerate(self._lu):
            b = hat[i].reshape(-1)
            x = lu.solve(np.column_stack([b.real, b.imag]))
            out[i] = (x[:, 0] + 1j * x[:, 1]).reshape(g.n - 2, g.m - 1)
        full = np.zeros(rhs.shape)
        full[:, 1:-1, :-1] = sfft.ifft(out, axis=0).real
        return full


def fd_poisson_solve(grid: FDGrid, f: np.ndarray) -> np.ndarray:
    """``Laplacian u = f`` with ``u = 0`` on the wall, via the Helmholtz factors at large scale."""
    # (1 - s L) u = -s f  ->  L u = f + u/s; using an explicit Poisson factorization instead:
    m, n = grid.m, grid.n
    dz = 2.0 / (n - 1)
    Dzz = sp.diags([np.ones(n - 3), -2 * np.ones(n - 2), np.ones(n - 3)], [-1, 0, 1]) / dz**2
    r = grid.r[:-1]
    hat = sfft.fft(f[:, 1:-1, :-1], axis=0)
    out = np.empty_like(hat)
    for i, sym in enumerate(_angular_symbol(grid)):
        lap = sp.kron(sp.identity(n - 2), _radial_operator(grid, 0) + sp.diags(sym / r**2))
        lap = lap + sp.kron(Dzz, sp.identity(m - 1))
        out[i] = spla.spsolve(sp.csc_matrix(lap), hat[i].reshape(-1)).reshape(n - 2, m - 1)
    u = np.zeros(f.shape)
    u[:, 1:-1, :-1] = sfft.ifft(out, axis=0).real
    return u


def fd_heat_run(grid: FDGrid, alpha: float, h: float, initial, forcing=None, steps: int = 1,
                output_every: int = 1, t0: float = 0.0) -> Trajectory:
    """Backward Euler on the finite-difference grid.

    ``initial(R, Z, T)`` and ``forcing(R, Z, T, t)`` are vectorised callables;
    the forcing is evaluated at the new time level.  Walls are held at zero.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    R, Z, T = grid.mesh()
    u = np.asarray(initial(R, Z, T), dtype=float) * np.ones(R.shape)
    solver = FDHeatSolver(grid, alpha * h)
    traj = Trajectory()
    traj.append(t0, u.copy())
    t = t0
    for i in range(1, steps + 1):
        t = t0 + i * h
        rhs = u.copy()
        if forcing is not None:
            rhs = rhs + h * forcing(R, Z, T, t)
        u = solver.solve(rhs)
        if not np.all(np.isfinite(u)):
            raise NumericalError(f"non-finite values at finite-difference step {i}")
        if i % output_every == 0 or i == steps:
            traj.append(t, u.copy())
    return traj


# --------------------------------------------------------------------------
# dense collocation


def chebyshev_diff_matrix(x: np.ndarray) -> np.ndarray:
    """Differentiation matrix on Chebyshev-Lobatto points in any order (barycentric form)."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    w = (-1.0) ** np.arange(n)
    w[0] *= 0.5
    w[-1] *= 0.5
    dx = x[:, None] - x[None, :]
    np.fill_diagonal(dx, 1.0)
    D = (w[None, :] / w[:, None]) / dx
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


class CollocationHeatSolver:
    """Dense LU of ``1 - scale * Laplacian`` for every Fourier mode on the CCF grid."""

    MAX_POINTS = 32**3

    def __init__(self, spec: GridSpec, scale: float):
        if spec.N > self.MAX_POINTS:
            raise MemoryError(f"dense collocation limited to {self.MAX_POINTS} points, got {spec.N}")
        self.spec = spec
        self.scale = float(scale)
        r, z, _ = grid_axes(spec)
        m, n = spec.m, spec.n
        Dr = chebyshev_diff_matrix(r)
        Dz = chebyshev_diff_matrix(z)
        Drr, Dzz = Dr @ Dr, Dz @ Dz
        Ir, Iz = np.eye(m), np.eye(n)
        on_axis = np.abs(r) < 1e-14
        inv_r = np.where(on_axis, 0.0, 1.0 / np.where(on_axis, 1.0, r))
        # unknown ordering: k slow, j fast (matches the (n, m) slices of a field)
        wall = np.zeros((n, m), dtype=bool)
        wall[0, :] = wall[-1, :] = True
        wall[:, 0] = wall[:, -1] = True
        wall = wall.ravel()
        axis_rows = np.zeros((n, m), dtype=bool)
        axis_rows[:, on_axis] = True
        axis_rows = axis_rows.ravel() & ~wall
        self._wall = wall
        self._lu = []
        for w in spec.wavenumbers():
            radial = Drr + inv_r[:, None] * Dr - (w * w) * np.diag(inv_r**2)
            lap = np.kron(Iz, radial) + np.kron(Dzz, Ir)
            if axis_rows.any():
                # regularity at r = 0: 2 u_rr + u_zz for w = 0, u = 0 otherwise
                if w == 0:
                    lap_axis = np.kron(Iz, 2 * Drr) + np.kron(Dzz, Ir)
                    lap[axis_rows] = lap_axis[axis_rows]
                else:
                    lap[axis_rows] = 0.0
            mat = np.eye(m * n) - self.scale * lap
            if axis_rows.any() and w != 0:
                mat[axis_rows] = np.eye(m * n)[axis_rows]
            mat[wall] = np.eye(m * n)[wall]
            self._lu.append(sla.lu_factor(mat))

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve for grid values ``(p, n, m)``; wall rows take the value ``0``."""
        spec = self.spec
        hat = sfft.fftshift(sfft.fft(rhs, axis=0), axes=0).reshape(spec.p, -1)
        out = np.empty_like(hat)
        for i, lu in enumerate(self._lu):
            b = hat[i].copy()
            b[self._wall] = 0.0
            x = sla.lu_solve(lu, np.column_stack([b.real, b.imag]))
            out[i] = x[:, 0] + 1j * x[:, 1]
        out = sfft.ifft(sfft.ifftshift(out.reshape(spec.shape), axes=0), axis=0)
        return out.real


def collocation_heat_run(spec: GridSpec, alpha: float, h: float, initial, forcing=None, steps: int = 1,
                         order: int = 4, output_every: int = 1, t0: float = 0.0) -> Trajectory:
    """BDF stepping (extrapolated implicit Euler startup) with dense collocation solves.

    ``initial(R, Z, T)`` and ``forcing(R, Z, T, t)`` are vectorised callables;
    forcing is evaluated at the new time level.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    R, Z, T = grid_mesh(spec)
    u = np.asarray(initial(R, Z, T), dtype=float) * np.ones(R.shape)
    scheme = BDFScheme(order, h)
    solvers: dict[float, CollocationHeatSolver] = {}

    def solve(rhs, scale):
        if scale not in solvers:
            solvers[scale] = CollocationHeatSolver(spec, scale)
        return solvers[scale].solve(rhs)

    def g(t):
        return 0.0 if forcing is None else forcing(R, Z, T, t)

    def startup_step(u0, t):
        xs, vals = [], []
        for k in range(1, order + 1):
            dt = h / k
            v = u0
            for i in range(1, k + 1):
                v = solve(v + dt * g(t + i * dt), dt * alpha)
            xs.append(dt)
            vals.append(v)
        tab = list(vals)
        for level in range(1, order):
            for i in range(order - 1, level - 1, -1):
                x_hi, x_lo = xs[i - level], xs[i]
                tab[i] = (x_hi * tab[i] - x_lo * tab[i - 1]) / (x_hi - x_lo)
        return tab[-1]

    history = [u]
    traj = Trajectory()
    traj.append(t0, u.copy())
    t = t0
    for i in range(1, steps + 1):
        if len(history) < order:
            new = startup_step(history[0], t)
        else:
            rhs = sum(wt * v for wt, v in zip(scheme.history_weights, history)) + scheme.kappa * g(t + h)
            new = solve(rhs, scheme.kappa * alpha)
        if not np.all(np.isfinite(new)):
            raise NumericalError(f"non-finite values at collocation step {i}")
        history = [new] + history[: order - 1]
        t = t0 + i * h
        if i % output_every == 0 or i == steps:
            traj.append(t, new.copy())
    return traj
