"""Dirichlet Helmholtz and Poisson solvers on the CCF coefficient tensor.

Boundary conditions are built into the basis.  In ``z`` the unknowns are
coefficients of ``phi_k = T_k - T_{k+2}``, which vanish at ``z = +-1``, and
the last two rows of the operator are dropped.  In ``r`` a mode with
wavenumber ``w`` only contains ``T_j`` with ``j = w (mod 2)``.  On that
parity class ``u(1) = 0`` already implies ``u(-1) = 0``.

Smooth fields also behave like ``r^|w|`` near the axis, which parity alone
does not enforce.  The radial basis therefore carries one extra pole
condition: ``u(0) = 0`` for even ``w != 0`` and ``u'(0) = 0`` for odd
``|w| >= 3``.  These are exactly the conditions under which ``u / r`` and
``u / r^2`` (as they appear in ``Delta_h`` and in the poloidal-toroidal
formulas) are polynomials.  Without them, the truncation error of
a solve leaves a small non-regular part which value-space ``1/r`` factors
turn into non-polynomial content.  Each constraint costs one recombination
step and one dropped row, so the reduced problem is still a banded
Sylvester equation and ADI applies unchanged.

All Fourier modes share the ``z`` factors ``B`` and ``D``.  They are therefore
solved together as one block-diagonal Sylvester system, with a single shift plan
covering the union of the per-mode spectra.  That plan (and the banded LU
factors behind it) is cached per grid and scale.
"""

from __future__ import annotations

import functools
import threading
from dataclasses import dataclass

import numpy as np

from .adi import (
    DEFAULT_TOL,
    AdiSolver,
    BandedLU,
    ShiftPlan,
    SylvesterProblem,
    compute_shifts,
    dense_sylvester_oracle,
    spectral_bounds,
)
from .grid import CoeffTensor, GridSpec
from .ultraop import (
    BandedMatrix,
    ModalOperator,
    build_conversion_02,
    build_derivative_2,
    build_modal_laplacian,
    build_r2,
)

__all__ = [
    "BoundaryCondition",
    "HOMOGENEOUS",
    "boundary_values",
    "reduced_modal_problem",
    "solve_modal_helmholtz",
    "solve_helmholtz_3d",
    "solve_poisson_3d",
    "solve_horizontal_poisson",
    "apply_r2",
    "clear_solver_cache",
]


@dataclass(frozen=True)
class BoundaryCondition:
    """Dirichlet data at ``r = +-1`` and ``z = +-1``.

    ``dirichlet_homogeneous`` means ``u = 0`` on the wall.  For
    ``dirichlet_lifted`` the solution is ``lift + v`` with ``v`` homogeneous;
    ``lift`` is any smooth tensor carrying the wall values.
    """

    kind: str = "dirichlet_homogeneous"
    lift: CoeffTensor | None = None

    def __post_init__(self):
        if self.kind not in ("dirichlet_homogeneous", "dirichlet_lifted"):
            raise ValueError(f"unknown boundary condition {self.kind!r}")
        if self.kind == "dirichlet_lifted" and self.lift is None:
            raise ValueError("a lifted boundary condition needs a lift tensor")
        if self.kind == "dirichlet_homogeneous" and self.lift is not None:
            raise ValueError("homogeneous boundary condition takes no lift")

    @classmethod
    def lifted(cls, lift: CoeffTensor) -> "BoundaryCondition":
        return cls("dirichlet_lifted", lift)


HOMOGENEOUS = BoundaryCondition()


def boundary_values(coeffs: CoeffTensor) -> float:
    """Largest coefficient-space trace ``|u|`` on ``r = +-1`` or ``z = +-1`` over all modes."""
    d = coeffs.data
    sign_r = (-1.0) ** np.arange(coeffs.spec.m)
    sign_z = (-1.0) ** np.arange(coeffs.spec.n)
    traces = [
        d.sum(axis=2),
        (d * sign_r).sum(axis=2),
        d.sum(axis=1),
        (d * sign_z[:, None]).sum(axis=1),
    ]
    return float(max(np.max(np.abs(t)) for t in traces))


# --------------------------------------------------------------------------
# reductions


@functools.lru_cache(maxsize=None)
def _parity_index(m: int, q: int) -> np.ndarray:
    idx = np.arange(q, m, 2)
    idx.setflags(write=False)
    return idx


@functools.lru_cache(maxsize=None)
def _recombination(size: int, step: int = 1) -> np.ndarray:
    """``size x (size - step)`` matrix with columns ``e_i - e_{i+step}``."""
    S = np.zeros((size, size - step))
    i = np.arange(size - step)
    S[i, i] = 1.0
    S[i + step, i] = -1.0
    S.setflags(write=False)
    return S


def _has_pole_condition(w: int) -> bool:
    w = abs(int(w))
    return (w % 2 == 0 and w > 0) or w >= 3


@functools.lru_cache(maxsize=None)
def _radial_basis(m: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    """Parity indices ``idx`` and the banded recombination ``S`` for wavenumber ``w``.

    Columns of ``S`` (coefficients on ``T_idx``) span the polynomials of the
    mode's parity that vanish at ``r = 1`` and satisfy the pole condition.
    The kept equation rows are ``idx[: S.shape[1]]``.
    """
    w = abs(int(w))
    idx = _parity_index(m, w % 2)
    constraints = [np.ones(len(idx))]
    if _has_pole_condition(w):
        if w % 2 == 0:
            constraints.append(np.cos(idx * np.pi / 2))  # T_j(0)
        else:
            constraints.append(idx * np.sin(idx * np.pi / 2))  # T_j'(0)
    G = np.array(constraints)
    c = len(constraints)
    size = max(len(idx) - c, 0)
    S = np.zeros((len(idx), size))
    for i in range(size):
        # leading coefficient 1 on T_idx[i], the next c entries chosen to meet the constraints
        coef = np.linalg.solve(G[:, i + 1 : i + 1 + c], -G[:, i])
        S[i, i] = 1.0
        S[i + 1 : i + 1 + c, i] = coef
    S.setflags(write=False)
    return idx, S


def _reduce_r(M: BandedMatrix, m: int, w: int) -> np.ndarray:
    idx, S = _radial_basis(m, w)
    dense = M.toarray()
    return dense[np.ix_(idx[: S.shape[1]], idx)] @ S


@functools.lru_cache(maxsize=None)
def _z_factors(n: int) -> tuple[BandedMatrix, BandedMatrix]:
    """Reduced ``B = C02^T`` and ``D = D2^T`` in the ``phi_k`` basis."""
    Sz = _recombination(n, 2)
    B = (build_conversion_02(n).toarray()[: n - 2] @ Sz).T
    D = (build_derivative_2(n).toarray()[: n - 2] @ Sz).T
    return BandedMatrix.from_dense(B), BandedMatrix.from_dense(D)


@functools.lru_cache(maxsize=4096)
def _r_factors(m: int, w: int, kind: str, scale: float) -> tuple[np.ndarray, np.ndarray]:
    """Reduced ``(A, C)`` for one wavenumber; ``kind`` is ``helmholtz`` or ``poisson``."""
    lap = build_modal_laplacian(m, abs(w))
    r2 = build_r2(m)
    if kind == "poisson":
        A, C = lap, r2
    else:
        A, C = (r2 - scale * lap if scale else r2), -scale * r2
    return _reduce_r(A, m, w), _reduce_r(C, m, w)


@functools.lru_cache(maxsize=4096)
def _r_bounds(m: int, w: int, kind: str, scale: float) -> tuple[float, float]:
    A, C = _r_factors(m, w, kind, scale)
    return spectral_bounds(BandedMatrix.from_dense(A), BandedMatrix.from_dense(C))


@functools.lru_cache(maxsize=None)
def _z_bounds(n: int) -> tuple[float, float]:
    B, D = _z_factors(n)
    return spectral_bounds(-D, B)


def reduced_modal_problem(m: int, n: int, wavenumber: int, scale: float = 0.0, E: np.ndarray | None = None,
                          kind: str = "helmholtz") -> SylvesterProblem:
    """The Dirichlet-reduced Sylvester problem that the solvers hand to ADI for one mode.

    Unknowns are ``(m_q - c) x (n - 2)`` coefficients in the recombined bases,
    where ``m_q`` counts the Chebyshev degrees of the mode's parity and ``c``
    is 1 plus the number of pole conditions.  ``E`` defaults to zeros of that
    shape.
    """
    if kind not in ("helmholtz", "poisson"):
        raise ValueError("kind must be 'helmholtz' or 'poisson'")
    A, C = _r_factors(m, abs(int(wavenumber)), kind, float(scale) if kind == "helmholtz" else 1.0)
    B, D = _z_factors(n)
    if E is None:
        E = np.zeros((A.shape[0], n - 2))
    return SylvesterProblem(BandedMatrix.from_dense(A), B, BandedMatrix.from_dense(C), D, np.asarray(E))


# --------------------------------------------------------------------------
# stacked solver


class _StackedSolver:
    """Block-diagonal Sylvester solver for a set of Fourier wavenumbers."""

    def __init__(self, m: int, n: int, wavenumbers, kind: str, scale: float, tol: float):
        self.m, self.n = m, n
        self.wavenumbers = tuple(int(w) for w in wavenumbers)
        self.kind, self.scale, self.tol = kind, scale, tol
        blocks_a, blocks_c = [], []
        self.rows = []  # (idx of T-coefficients, recombination, start, stop) per wavenumber
        start = 0
        for w in self.wavenumbers:
            idx, S = _radial_basis(m, abs(w))
            self.rows.append((idx, S, start, start + S.shape[1]))
            start += S.shape[1]
            if S.shape[1] == 0:
                continue  # too few coefficients for a regular mode: the solution is zero
            A, C = _r_factors(m, abs(w), kind, scale)
            blocks_a.append(BandedMatrix.from_dense(A))
            blocks_c.append(BandedMatrix.from_dense(C))
        self.size = start
        self.B, self.D = _z_factors(n)
        if not blocks_a:
            self.mass_only, self.plan, self.adi = True, None, None
            return
        self.A = BandedMatrix.block_diag(blocks_a)
        self.C = BandedMatrix.block_diag(blocks_c)
        self.mass_only = not self.C.bands
        if self.mass_only:
            self._a_lu = BandedLU(self.A)
            self._b_lu = BandedLU(self.B)
            self.plan = None
            self.adi = None
        else:
            active = {abs(w) for w, row in zip(self.wavenumbers, self.rows) if row[3] > row[2]}
            bounds = [_r_bounds(m, w, kind, scale) for w in active]
            lo = min(b[0] for b in bounds)
            hi = max(b[1] for b in bounds)
            self.plan: ShiftPlan | None = compute_shifts((lo, hi), _z_bounds(n), tol)
            self.adi = AdiSolver(self.A, self.B, self.C, self.D, self.plan)

    def gather(self, E: np.ndarray) -> np.ndarray:
        """Stack the retained rows/columns of full ``(modes, m, n)`` right-hand sides."""
        out = np.empty((self.size, self.n - 2), dtype=E.dtype)
        for i, (idx, S, a, b) in enumerate(self.rows):
            out[a:b] = E[i][idx[: b - a], : self.n - 2]
        return out

    def scatter(self, Xr: np.ndarray) -> np.ndarray:
        """Expand reduced unknowns back to full ``(modes, m, n)`` Chebyshev coefficients."""
        Sz = _recombination(self.n, 2)
        Xz = Xr @ Sz.T
        out = np.zeros((len(self.wavenumbers), self.m, self.n), dtype=Xr.dtype)
        for i, (idx, S, a, b) in enumerate(self.rows):
            out[i][idx] = S @ Xz[a:b]
        return out

    def solve(self, E: np.ndarray) -> np.ndarray:
        Er = self.gather(E)
        if self.size == 0:
            return self.scatter(Er)
        if self.mass_only:
            Xr = self._a_lu.solve(Er)
            Xr = self._b_lu.solve(Xr.T, trans=True).T
        else:
            Xr = self.adi.solve(Er)
        return self.scatter(Xr)


def _dense_solve(m: int, n: int, wavenumbers, kind: str, scale: float, E: np.ndarray) -> np.ndarray:
    """Reference path: one dense Kronecker solve per wavenumber (no caching)."""
    B, D = _z_factors(n)
    Sz = _recombination(n, 2)
    out = np.zeros((len(wavenumbers), m, n), dtype=np.result_type(E, float))
    for i, w in enumerate(wavenumbers):
        idx, S = _radial_basis(m, abs(int(w)))
        if S.shape[1] == 0:
            continue
        A, C = _r_factors(m, abs(int(w)), kind, scale)
        Er = E[i][idx[: S.shape[1]], : n - 2]
        prob = SylvesterProblem(BandedMatrix.from_dense(A), B, BandedMatrix.from_dense(C), D, Er)
        Xr = dense_sylvester_oracle(prob)
        out[i][idx] = S @ (Xr @ Sz.T)
    return out


_CACHE: dict = {}
_CACHE_LOCK = threading.Lock()


def _stacked(m, n, wavenumbers, kind, scale, tol) -> _StackedSolver:
    key = (m, n, tuple(wavenumbers), kind, float(scale), float(tol))
    solver = _CACHE.get(key)
    if solver is None:
        with _CACHE_LOCK:
            solver = _CACHE.get(key)
            if solver is None:
                solver = _StackedSolver(m, n, wavenumbers, kind, float(scale), float(tol))
                _CACHE[key] = solver
    return solver


def clear_solver_cache() -> None:
    with _CACHE_LOCK:
        _CACHE.clear()


# --------------------------------------------------------------------------
# operator application helpers


def _left(M: BandedMatrix, X: np.ndarray) -> np.ndarray:
    """``M @ X[l]`` for every slice of a ``(p, m, n)`` stack."""
    p, m, n = X.shape
    Y = M.tocsr() @ np.moveaxis(X, 1, 0).reshape(m, p * n)
    return np.moveaxis(Y.reshape(M.rows, p, n), 0, 1)


def _right_t(X: np.ndarray, M: BandedMatrix) -> np.ndarray:
    """``X[l] @ M.T`` for every slice of a ``(p, m, n)`` stack."""
    p, m, n = X.shape
    Y = M.tocsr() @ X.reshape(p * m, n).T
    return Y.T.reshape(p, m, M.rows)


def apply_r2(F: np.ndarray) -> np.ndarray:
    """``R2 F_l C02^T`` for every slice ``F_l`` of a ``(p, m, n)`` stack."""
    p, m, n = F.shape
    return _right_t(_left(build_r2(m), F), build_conversion_02(n))


def _modal_apply(kind: str, scale: float, X: np.ndarray, wavenumbers) -> np.ndarray:
    """``A X B + C X D`` per slice for the Helmholtz or Poisson quadruple."""
    p, m, n = X.shape
    mass = apply_r2(X)
    out = np.empty_like(mass)
    c02, d2 = build_conversion_02(n), build_derivative_2(n)
    lap_z = _right_t(_left(build_r2(m), X), d2)
    for i, w in enumerate(wavenumbers):
        lap_r = build_modal_laplacian(m, abs(int(w))) @ X[i]
        lap = (c02.tocsr() @ lap_r.T).T + lap_z[i]
        out[i] = lap if kind == "poisson" else mass[i] - scale * lap
    return out


# --------------------------------------------------------------------------
# public solvers


def _check_spec(spec: GridSpec):
    if spec.m < 4 or spec.n < 4:
        raise ValueError("need at least four coefficients per Chebyshev direction")


def solve_modal_helmholtz(op: ModalOperator, F: np.ndarray, bc: BoundaryCondition = HOMOGENEOUS,
                          tol: float = DEFAULT_TOL, lift: np.ndarray | None = None) -> np.ndarray:
    """Solve ``A X B + C X D = F`` for one Fourier slice with Dirichlet walls.

    ``F`` is the full ``m x n`` right-hand side in the ``C^(2) x C^(2)`` basis.
    For a lifted condition pass the lift's slice as ``lift`` (``bc.lift`` is a
    whole tensor, so the slice cannot be inferred here).
    """
    m, n = op.shape
    F = np.asarray(F)
    if F.shape != (m, n):
        raise ValueError(f"F must be {m}x{n}, got {F.shape}")
    kind = "helmholtz"
    scale = op.scale
    if op.A == build_modal_laplacian(m, abs(op.wavenumber)) and op.C == build_r2(m):
        kind, scale = "poisson", 1.0
    if bc.kind == "dirichlet_lifted":
        if lift is None:
            raise ValueError("pass the lift slice for a lifted boundary condition")
        F = F - op.apply(lift)
    solver = _stacked(m, n, (op.wavenumber,), kind, scale, tol)
    X = solver.solve(F[None])[0]
    return X if lift is None else X + lift


def _hermitian_half(E: np.ndarray, tol: float = 1e-13):
    """Slice indices that determine a conjugate-paired stack, or ``None`` if unpaired."""
    p = E.shape[0]
    h = p // 2
    idx = np.arange(p)
    partner = 2 * h - idx
    paired = partner < p
    scale = max(float(np.max(np.abs(E), initial=0.0)), 1e-300)
    diff = E[idx[paired]] - np.conj(E[partner[paired]])
    if p < 3 or float(np.max(np.abs(diff), initial=0.0)) > tol * scale:
        return None
    return idx[(idx >= h) | ~paired]


def _solve_3d(kind: str, scale: float, E: np.ndarray, spec: GridSpec, bc: BoundaryCondition,
              tol: float, method: str = "adi") -> CoeffTensor:
    if method not in ("adi", "dense"):
        raise ValueError("method must be 'adi' or 'dense'")
    w = spec.wavenumbers()
    if bc.kind == "dirichlet_lifted":
        lift = bc.lift.slices()
        E = E - _modal_apply(kind, scale, lift, w)

    def solve(modes, rhs):
        if method == "dense":
            return _dense_solve(spec.m, spec.n, modes, kind, scale, rhs)
        return _stacked(spec.m, spec.n, tuple(modes), kind, scale, tol).solve(rhs)

    keep = _hermitian_half(E)
    if keep is None:
        X = solve(w, E)
    else:
        # real data: the operators depend on |w| only, so X_{-w} = conj(X_w)
        Xh = solve(w[keep], E[keep])
        X = np.empty_like(E)
        X[keep] = Xh
        h = spec.p // 2
        rest = np.setdiff1d(np.arange(spec.p), keep)
        X[rest] = np.conj(X[2 * h - rest])
    if bc.kind == "dirichlet_lifted":
        X = X + lift
    return CoeffTensor.from_slices(spec, X)


def solve_helmholtz_3d(rhs: CoeffTensor, scale: float, bc: BoundaryCondition = HOMOGENEOUS,
                       tol: float = DEFAULT_TOL, method: str = "adi") -> CoeffTensor:
    """Solve ``(1 - scale * Laplacian) u = rhs`` with Dirichlet walls, all modes at once.

    ``method="dense"`` replaces ADI by a dense Kronecker solve per mode; it is
    a reference path for small grids (``m n <= 4096``).
    """
    spec = rhs.spec
    _check_spec(spec)
    if not np.all(np.isfinite(rhs.data)):
        raise ValueError("right-hand side must be finite")
    return _solve_3d("helmholtz", float(scale), apply_r2(rhs.slices()), spec, bc, tol, method)


def solve_poisson_3d(f: CoeffTensor, bc: BoundaryCondition = HOMOGENEOUS,
                     tol: float = DEFAULT_TOL, method: str = "adi") -> CoeffTensor:
    """Solve ``Laplacian u = f`` with Dirichlet walls (``u = 0`` or the lift's values)."""
    spec = f.spec
    _check_spec(spec)
    if not np.all(np.isfinite(f.data)):
        raise ValueError("right-hand side must be finite")
    return _solve_3d("poisson", 1.0, apply_r2(f.slices()), spec, bc, tol, method)


@functools.lru_cache(maxsize=4096)
def _horizontal_factors(m: int, w: int) -> BandedLU:
    A, _ = _r_factors(m, w, "poisson", 1.0)
    return BandedLU(BandedMatrix.from_dense(A))


def solve_horizontal_poisson(rhs: CoeffTensor) -> CoeffTensor:
    """Solve ``Delta_h u = rhs`` with ``u(r = +-1) = 0`` for every mode and every ``T_k(z)``.

    Each wavenumber gives one banded radial system shared by all ``n``
    vertical coefficients, so the work is linear in ``N``.
    """
    spec = rhs.spec
    if not np.all(np.isfinite(rhs.data)):
        raise ValueError("right-hand side must be finite")
    m = spec.m
    F = _left(build_r2(m), rhs.slices())
    out = np.zeros_like(F)
    for i, w in enumerate(spec.wavenumbers()):
        idx, S = _radial_basis(m, abs(int(w)))
        if S.shape[1] == 0:
            continue
        ur = _horizontal_factors(m, abs(int(w))).solve(F[i][idx[: S.shape[1]]])
        out[i][idx] = S @ ur
    return CoeffTensor.from_slices(spec, out)
