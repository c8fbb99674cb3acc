"""Alternating direction implicit iteration for ``A X B + C X D = E``.

The shifts come from Zolotarev's rational approximation problem on the two
real intervals ``[a, b]`` (spectrum of ``C^-1 A``) and ``[c, d]`` (spectrum of
``-D B^-1``): an elliptic-function formula on the symmetric pair
``[-alpha, -1] u [1, alpha]`` carried over by a Möbius map.

One iteration is two half-steps::

    (v_j C - A) X' B      = C X (v_j B + D) - E
    C X'' (u_j B + D)     = (u_j C - A) X' B + E

where ``u_j`` lies in ``[a, b]`` and ``v_j`` in ``[c, d]``.  With these signs
the exact solution is a fixed point of both half-steps and the error is
multiplied by ``(Q - v)(Q - u)^-1`` on the left and ``(P - u)(P - v)^-1`` on
the right, ``Q = C^-1 A``, ``P = -D B^-1``.  The loop below tracks
``Y = C X`` and the product ``X' B`` directly, so every half-step is one
banded multiply and one banded LU solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .errors import AdiConvergenceError, SingularOperatorError, SpectrumError
from .special import elliptic_K, jacobi_dn, mobius_from_points
from .ultraop import BandedMatrix

__all__ = [
    "BandedLU",
    "SylvesterProblem",
    "ShiftPlan",
    "AdiSolver",
    "spectral_bounds",
    "gershgorin_bounds",
    "compute_shifts",
    "plan_shifts",
    "adi_solve",
    "dense_sylvester_oracle",
    "backward_error",
]

DEFAULT_TOL = 1e-12


class BandedLU:
    """LU factors (partial pivoting) of a square :class:`BandedMatrix`."""

    def __init__(self, matrix: BandedMatrix):
        self.n = matrix.rows
        self.kl = matrix.lower
        self.ku = matrix.upper
        lu, ipiv, info = lapack.dgbtrf(matrix.to_lapack(self.kl, self.ku), self.kl, self.ku)
        if info != 0:
            raise SingularOperatorError(f"banded LU failed (info={info})")
        self._lu = lu
        self._ipiv = ipiv

    def solve(self, b: np.ndarray, trans: bool = False) -> np.ndarray:
        """Solve ``M x = b`` (or ``M^T x = b``) for real or complex ``b``."""
        b = np.asarray(b)
        vec = b.ndim == 1
        if vec:
            b = b[:, None]
        cplx = np.iscomplexobj(b)
        rhs = np.ascontiguousarray(b, dtype=np.complex128 if cplx else np.float64)
        if cplx:
            rhs = rhs.view(np.float64)
        x, info = lapack.dgbtrs(self._lu, self.kl, self.ku, rhs, self._ipiv, trans=int(trans))
        if info != 0:
            raise SingularOperatorError(f"banded solve failed (info={info})")
        if cplx:
            x = np.ascontiguousarray(x).view(np.complex128)
        return x[:, 0] if vec else x


@dataclass(frozen=True)
class SylvesterProblem:
    """``A X B + C X D = E`` with ``A, C`` of size ``m`` and ``B, D`` of size ``n``."""

    A: BandedMatrix
    B: BandedMatrix
    C: BandedMatrix
    D: BandedMatrix
    E: np.ndarray

    def __post_init__(self):
        m, n = self.A.rows, self.B.rows
        for name, mat, size in (("A", self.A, m), ("C", self.C, m), ("B", self.B, n), ("D", self.D, n)):
            if mat.shape != (size, size):
                raise ValueError(f"{name} has shape {mat.shape}, expected {(size, size)}")
        if np.shape(self.E) != (m, n):
            raise ValueError(f"E has shape {np.shape(self.E)}, expected {(m, n)}")

    def residual(self, X: np.ndarray) -> np.ndarray:
        return _apply(self.A, self.B, self.C, self.D, X) - self.E


@dataclass(frozen=True)
class ShiftPlan:
    """Spectral intervals, Zolotarev data and the ADI shift sequences."""

    a: float
    b: float
    c: float
    d: float
    gamma_cr: float
    alpha_z: float
    modulus: float
    J: int
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    tol: float = DEFAULT_TOL


def _apply(A, B, C, D, X):
    ax = A @ X
    cx = C @ X
    return (B.tocsr().T @ ax.T).T + (D.tocsr().T @ cx.T).T


def _right(Y: np.ndarray, M) -> np.ndarray:
    """``Y @ M`` for a sparse ``M`` acting from the right."""
    return (M.T @ Y.T).T


def spectral_bounds(A: BandedMatrix, C: BandedMatrix, method: str = "dense") -> tuple[float, float]:
    """Smallest and largest eigenvalue of ``C^-1 A`` (a real spectrum is required).

    ``method="dense"`` runs a dense generalized eigensolve; ``"gershgorin"``
    returns the (looser, but cheap to reason about) Gershgorin enclosure of
    ``C^-1 A``.
    """
    if method == "gershgorin":
        return gershgorin_bounds(A, C)
    if method != "dense":
        raise ValueError(f"unknown method {method!r}")
    a, c = A.toarray(), C.toarray()
    if np.linalg.matrix_rank(c) < c.shape[0]:
        raise SingularOperatorError("C is singular")
    ev = sla.eigvals(a, c)
    if not np.all(np.isfinite(ev)):
        raise SingularOperatorError("C is singular")
    radius = float(np.max(np.abs(ev)))
    if np.max(np.abs(ev.imag)) > 1e-6 * max(radius, np.finfo(float).tiny):
        raise SpectrumError("spectrum of C^-1 A is not real")
    return float(ev.real.min()), float(ev.real.max())


def gershgorin_bounds(A: BandedMatrix, C: BandedMatrix) -> tuple[float, float]:
    """Gershgorin interval for the real parts of the eigenvalues of ``C^-1 A``."""
    q = np.linalg.solve(C.toarray(), A.toarray())
    centre = np.diag(q)
    radius = np.sum(np.abs(q), axis=1) - np.abs(centre)
    return float(np.min(centre - radius)), float(np.max(centre + radius))


def compute_shifts(bounds_AC, bounds_DB, tol: float = DEFAULT_TOL) -> ShiftPlan:
    """Zolotarev-optimal shifts for spectra in ``[a, b]`` and ``[c, d]``.

    ``J = ceil(log(16 gamma) log(4/tol) / pi^2)`` with cross-ratio ``gamma``.
    When one interval is a single point the equation is solved exactly by a
    single iteration whose shift sits on that point, so ``J = 1``.
    """
    a, b = (float(x) for x in bounds_AC)
    c, d = (float(x) for x in bounds_DB)
    if a > b or c > d:
        raise ValueError("interval bounds must be ordered (lo, hi)")
    if not (b < c or d < a):
        raise SpectrumError(f"spectral intervals [{a}, {b}] and [{c}, {d}] overlap")
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    if a == b or c == d:
        return ShiftPlan(a, b, c, d, 1.0, 1.0, 0.0, 1,
                         np.array([0.5 * (a + b)]), np.array([0.5 * (c + d)]), tol)
    gamma = abs(c - a) * abs(d - b) / (abs(c - b) * abs(d - a))
    alpha = -1.0 + 2.0 * gamma + 2.0 * math.sqrt(gamma * gamma - gamma)
    kprime = 1.0 / alpha
    modulus = math.sqrt((1.0 - kprime) * (1.0 + kprime))
    J = max(1, math.ceil(math.log(16.0 * gamma) * math.log(4.0 / tol) / math.pi**2))
    K = elliptic_K(kprime=kprime)
    dn = jacobi_dn((2 * np.arange(J) + 1) * K / (2 * J), kprime=kprime)
    T = mobius_from_points([-alpha, -1.0, 1.0, alpha], [a, b, c, d], tol=1e-8)
    u = np.asarray(T(-alpha * dn), dtype=float)
    v = np.asarray(T(alpha * dn), dtype=float)
    return ShiftPlan(a, b, c, d, gamma, alpha, modulus, J, u, v, tol)


def plan_shifts(A, B, C, D, tol: float = DEFAULT_TOL, method: str = "dense") -> ShiftPlan:
    """Bounds for both pencils followed by :func:`compute_shifts`."""
    return compute_shifts(spectral_bounds(A, C, method), spectral_bounds(-D, B, method), tol)


def backward_error(A, B, C, D, X, E) -> float:
    """Normwise backward error ``|AXB + CXD - E| / (||A||X||B|| + ||C||X||D|| + |E|)``."""
    res = np.linalg.norm(_apply(A, B, C, D, X) - E)
    absx = np.abs(X)
    absA, absB = abs(A.tocsr()), abs(B.tocsr())
    absC, absD = abs(C.tocsr()), abs(D.tocsr())
    t1 = np.linalg.norm(_right(absA @ absx, absB))
    t2 = np.linalg.norm(_right(absC @ absx, absD))
    denom = t1 + t2 + np.linalg.norm(E)
    return float(res / denom) if denom > 0 else 0.0


class AdiSolver:
    """ADI for a fixed operator quadruple, with all shifted factorizations cached.

    Reusing one solver across right-hand sides (time steps, Fourier modes
    stacked block-diagonally) makes each solve cost ``O(J m n)``.
    """

    def __init__(self, A: BandedMatrix, B: BandedMatrix, C: BandedMatrix, D: BandedMatrix,
                 plan: ShiftPlan):
        self.A, self.B, self.C, self.D = A, B, C, D
        self.plan = plan
        self._A, self._C = A.tocsr(), C.tocsr()
        self._B, self._D = B.tocsr(), D.tocsr()
        self._absA, self._absC = abs(self._A), abs(self._C)
        self._absB, self._absD = abs(self._B), abs(self._D)
        self._c_lu = BandedLU(C)
        self._steps = []
        for j, (u, v) in enumerate(zip(plan.u, plan.v)):
            try:
                left = BandedLU(v * C - A)
                right = BandedLU(u * B + D)
            except SingularOperatorError as exc:
                raise SingularOperatorError(f"shifted operator singular at shift {j}", j) from exc
            mult_right = (v * self._B + self._D).T.tocsr()
            mult_left = (u * self._C - self._A).tocsr()
            self._steps.append((mult_right, left, mult_left, right))

    def _sweep(self, Y: np.ndarray, E: np.ndarray, steps=None) -> np.ndarray:
        for mult_right, left, mult_left, right in self._steps if steps is None else steps:
            W = left.solve((mult_right @ Y.T).T - E)
            Y = right.solve((mult_left @ W + E).T, trans=True).T
        return Y

    def backward_error(self, X: np.ndarray, E: np.ndarray) -> float:
        res = np.linalg.norm(_right(self._A @ X, self._B) + _right(self._C @ X, self._D) - E)
        absx = np.abs(X)
        denom = (np.linalg.norm(_right(self._absA @ absx, self._absB))
                 + np.linalg.norm(_right(self._absC @ absx, self._absD))
                 + np.linalg.norm(E))
        return float(res / denom) if denom > 0 else 0.0

    def solve(self, E: np.ndarray, max_cycles: int = 4, record_history: bool = False,
              check: bool = True):
        """Run ``J`` iterations from ``X = 0``; repeat the cycle while not converged.

        Convergence is judged by the normwise backward error against
        ``10 * plan.tol``.  The raw relative residual cannot be used at large
        sizes because ``|A||X||B|`` exceeds ``|E|`` by orders of magnitude and
        rounding alone leaves residuals well above ``tol |E|``.
        Returns ``X``, or ``(X, history)`` when ``record_history`` is set.
        """
        E = np.asarray(E)
        if np.iscomplexobj(E):
            E = E.astype(np.complex128)
        else:
            E = E.astype(np.float64)
        history: list[float] = []
        if not np.any(E):
            X = np.zeros_like(E)
            return (X, history) if record_history else X
        Y = np.zeros_like(E)
        if record_history:
            # one iteration at a time so that every residual is visible
            X = Y
            for cycle in range(max_cycles):
                for step in self._steps:
                    Y = self._sweep(Y, E, [step])
                    X = self._c_lu.solve(Y)
                    history.append(self.backward_error(X, E))
                if history[-1] <= 10 * self.plan.tol:
                    return X, history
            if check:
                raise AdiConvergenceError(
                    f"ADI stalled at backward error {history[-1]:.3e}", history)
            return X, history
        for cycle in range(max_cycles):
            Y = self._sweep(Y, E)
            X = self._c_lu.solve(Y)
            if not check:
                return X
            err = self.backward_error(X, E)
            history.append(err)
            if not np.isfinite(err):
                break
            if err <= 10 * self.plan.tol:
                return X
        raise AdiConvergenceError(
            f"ADI did not converge after {max_cycles} cycles of {self.plan.J} "
            f"iterations (backward error {history[-1]:.3e})", history)


def adi_solve(problem: SylvesterProblem, plan: ShiftPlan | None = None, tol: float = DEFAULT_TOL,
              **kwargs):
    """Solve ``problem`` by ADI; shifts are planned from dense bounds if not given."""
    A, B, C, D = problem.A, problem.B, problem.C, problem.D
    if plan is None:
        plan = plan_shifts(A, B, C, D, tol)
    return AdiSolver(A, B, C, D, plan).solve(problem.E, **kwargs)


def dense_sylvester_oracle(problem: SylvesterProblem) -> np.ndarray:
    """Solve ``(B^T kron A + D^T kron C) vec(X) = vec(E)`` densely."""
    m, n = problem.E.shape
    if m * n > 4096:
        raise ValueError("dense oracle limited to m*n <= 4096")
    K = np.kron(problem.B.toarray().T, problem.A.toarray())
    K += np.kron(problem.D.toarray().T, problem.C.toarray())
    rhs = np.asarray(problem.E).reshape(-1, order="F")
    try:
        x = sla.solve(K, rhs)
    except sla.LinAlgError as exc:
        raise SingularOperatorError("Kronecker system is singular") from exc
    return x.reshape((m, n), order="F")
