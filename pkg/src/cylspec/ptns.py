"""Poloidal-toroidal scalars and a vorticity-form Navier-Stokes stepper.

A solenoidal field is written ``V = curl(lambda z_hat) + curl curl(gamma z_hat)``,
which in cylindrical components reads::

    V^r     = d_theta lambda / r + d_r d_z gamma
    V^theta = -d_r lambda + d_theta d_z gamma / r
    V^z     = -Delta_h gamma

with ``Delta_h = d_rr + d_r / r + d_thetatheta / r^2``.  The curl of such a field
has scalars ``(-Laplacian gamma, lambda)``, so vorticity and the curl of the
nonlinear term live in the same two-scalar representation and evolve through
two decoupled heat equations with diffusivity ``1/Re``.

Derivatives are taken in coefficient space.  Every ``1/r`` factor is applied to
grid values, which requires an even number of radial points so that ``r = 0``
is not a node.  The division is exact for fields that are regular on the axis,
e.g. anything built from polynomials in ``x = r cos(theta)``, ``y = r sin(theta)``
and ``z``.

Gauge: ``lambda`` and ``gamma`` are fixed by ``lambda = gamma = 0`` at ``r = +-1``.
The decomposition recovers the part of ``V`` that the two scalars can carry.  A
horizontal field that is harmonic in every plane is invisible to it;
:func:`pt_boundary_residual` reports how much of ``V`` was missed.

Boundary conditions (limitation): the stepper closes the system with
homogeneous Dirichlet conditions on the vorticity scalars ``lambda_omega`` and
``gamma_omega`` and with ``lambda_psi = 0`` on the wall for the vector
potential.  These keep every solve well posed and make the Stokes limit two
exact heat equations, but they are not the true vorticity boundary conditions
of a no-slip wall.  The velocity is divergence-free to rounding error while
its wall values are generally nonzero; :func:`ns_diagnostics` reports them
as ``wall_slip``.  Results are therefore a solver exercise, not a model of a
physical no-slip container.

The unpaired Nyquist angle mode of the explicit term is kept at zero because
the first and second ``theta`` derivatives treat it inconsistently.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .adi import DEFAULT_TOL
from .errors import NotIncompressibleError, NumericalError
from .grid import CoeffTensor, GridField, GridSpec, grid_mesh
from .solvers import HOMOGENEOUS, solve_helmholtz_3d, solve_horizontal_poisson, solve_poisson_3d
from .timestep import BDFScheme, bdf_rhs, imex_coefficients
from .transform import analyze, diff_r, diff_theta, diff_z, synthesize

__all__ = [
    "PTScalars",
    "VectorFieldCoeffs",
    "NSState",
    "pt_synthesize",
    "pt_decompose",
    "pt_boundary_residual",
    "curl",
    "divergence",
    "laplacian",
    "curl_pt",
    "velocity_from_vorticity",
    "no_slip_residual",
    "nonlinear_term",
    "advective_term",
    "ns_step",
    "ns_run",
    "ns_diagnostics",
]


def _require_even(spec: GridSpec) -> None:
    if spec.m % 2:
        raise ValueError("this operation needs an even number of radial points (no node at r = 0)")


def _values(c: CoeffTensor, r: int = 0, z: int = 0, t: int = 0) -> np.ndarray:
    """Grid values of a mixed derivative of ``c``."""
    if r:
        c = diff_r(c, r)
    if z:
        c = diff_z(c, z)
    if t:
        c = diff_theta(c, t)
    return synthesize(c).values


def _radius(spec: GridSpec) -> np.ndarray:
    R, _, _ = grid_mesh(spec)
    return R


def _coeffs(spec: GridSpec, values: np.ndarray) -> CoeffTensor:
    return analyze(GridField(spec, values))


@dataclass(frozen=True)
class PTScalars:
    """Toroidal ``lam`` and poloidal ``gam`` scalars."""

    lam: CoeffTensor
    gam: CoeffTensor

    def __post_init__(self):
        if self.lam.spec != self.gam.spec:
            raise ValueError("scalars live on different grids")

    @property
    def spec(self) -> GridSpec:
        return self.lam.spec

    @classmethod
    def zeros(cls, spec: GridSpec) -> "PTScalars":
        z = CoeffTensor.zeros(spec)
        return cls(z, z)

    def __add__(self, other: "PTScalars") -> "PTScalars":
        return PTScalars(self.lam + other.lam, self.gam + other.gam)

    def __sub__(self, other: "PTScalars") -> "PTScalars":
        return PTScalars(self.lam - other.lam, self.gam - other.gam)

    def __mul__(self, a) -> "PTScalars":
        return PTScalars(self.lam * a, self.gam * a)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return max(self.lam.max_abs(), self.gam.max_abs())


@dataclass(frozen=True)
class VectorFieldCoeffs:
    """Cylindrical components ``(V^r, V^theta, V^z)`` as coefficient tensors."""

    comp_r: CoeffTensor
    comp_theta: CoeffTensor
    comp_z: CoeffTensor

    @property
    def spec(self) -> GridSpec:
        return self.comp_r.spec

    @property
    def components(self) -> tuple[CoeffTensor, CoeffTensor, CoeffTensor]:
        return (self.comp_r, self.comp_theta, self.comp_z)

    @classmethod
    def from_values(cls, spec: GridSpec, vr, vt, vz) -> "VectorFieldCoeffs":
        return cls(_coeffs(spec, vr), _coeffs(spec, vt), _coeffs(spec, vz))

    def values(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(synthesize(c).values for c in self.components)

    def __sub__(self, other: "VectorFieldCoeffs") -> "VectorFieldCoeffs":
        return VectorFieldCoeffs(*(a - b for a, b in zip(self.components, other.components)))

    def max_abs(self) -> float:
        return max(c.max_abs() for c in self.components)


def pt_synthesize(s: PTScalars) -> VectorFieldCoeffs:
    """``curl(lambda z_hat) + curl curl(gamma z_hat)``."""
    spec = s.spec
    _require_even(spec)
    R = _radius(spec)
    lam, gam = s.lam, s.gam
    vr = _values(lam, t=1) / R + _values(gam, r=1, z=1)
    vt = -_values(lam, r=1) + _values(gam, z=1, t=1) / R
    vz = -(_values(gam, r=2) + _values(gam, r=1) / R + _values(gam, t=2) / R**2)
    return VectorFieldCoeffs.from_values(spec, vr, vt, vz)


def divergence(V: VectorFieldCoeffs) -> CoeffTensor:
    """``d_r V^r + (V^r + d_theta V^theta) / r + d_z V^z``."""
    spec = V.spec
    _require_even(spec)
    R = _radius(spec)
    vr, vt, vz = V.components
    div = _values(vr, r=1) + (_values(vr) + _values(vt, t=1)) / R + _values(vz, z=1)
    return _coeffs(spec, div)


def curl(V: VectorFieldCoeffs) -> VectorFieldCoeffs:
    """Cylindrical curl, derivatives spectral and ``1/r`` pointwise."""
    spec = V.spec
    _require_even(spec)
    R = _radius(spec)
    vr, vt, vz = V.components
    cr = _values(vz, t=1) / R - _values(vt, z=1)
    ct = _values(vr, z=1) - _values(vz, r=1)
    cz = _values(vt, r=1) + (_values(vt) - _values(vr, t=1)) / R
    return VectorFieldCoeffs.from_values(spec, cr, ct, cz)


def laplacian(c: CoeffTensor) -> CoeffTensor:
    """Scalar ``Laplacian`` with the ``1/r`` terms applied to grid values."""
    spec = c.spec
    _require_even(spec)
    R = _radius(spec)
    val = _values(c, r=2) + _values(c, r=1) / R + _values(c, t=2) / R**2 + _values(c, z=2)
    return _coeffs(spec, val)


def curl_pt(s: PTScalars) -> PTScalars:
    """Scalars of ``curl V`` for ``V`` with scalars ``s``: ``(-Laplacian gamma, lambda)``."""
    return PTScalars(-laplacian(s.gam), s.lam)


def pt_decompose(V: VectorFieldCoeffs, check_divergence: bool = True, div_tol: float = 1e-8) -> PTScalars:
    """``gamma = Delta_h^-1(-V^z)``, ``lambda = Delta_h^-1(-(curl V)^z)`` in the Dirichlet gauge."""
    spec = V.spec
    _require_even(spec)
    if check_divergence:
        div = divergence(V).max_abs()
        if div > div_tol * max(1.0, V.max_abs()):
            raise NotIncompressibleError(f"field divergence {div:.3e} exceeds {div_tol:g}")
    R = _radius(spec)
    vr, vt, _ = V.components
    curl_z = _values(vt, r=1) + (_values(vt) - _values(vr, t=1)) / R
    gam = solve_horizontal_poisson(-V.comp_z)
    lam = solve_horizontal_poisson(_coeffs(spec, -curl_z))
    return PTScalars(lam, gam)


def pt_boundary_residual(V: VectorFieldCoeffs, s: PTScalars) -> float:
    """Mismatch in ``d_theta lambda + r d_r d_z gamma = r V^r`` and ``d_theta d_z gamma - r d_r lambda = r V^theta``.

    Zero when ``s`` represents ``V`` exactly; a nonzero value measures the part
    of ``V`` the two scalars cannot carry in the chosen gauge.
    """
    spec = s.spec
    R = _radius(spec)
    vr, vt, _ = V.values()
    e1 = _values(s.lam, t=1) + R * _values(s.gam, r=1, z=1) - R * vr
    e2 = _values(s.gam, z=1, t=1) - R * _values(s.lam, r=1) - R * vt
    return float(max(np.max(np.abs(e1)), np.max(np.abs(e2))))


def velocity_from_vorticity(omega: PTScalars, tol: float = DEFAULT_TOL) -> PTScalars:
    """Velocity scalars ``(gamma_omega, lambda_psi)`` with ``Laplacian lambda_psi = -lambda_omega``.

    ``lambda_psi`` is solved with ``lambda_psi = 0`` on the whole wall.  Whether the
    resulting velocity satisfies no-slip is reported by :func:`no_slip_residual`.
    """
    lam_psi = solve_poisson_3d(-omega.lam, HOMOGENEOUS, tol)
    return PTScalars(omega.gam, lam_psi)


def no_slip_residual(v: PTScalars) -> float:
    """Largest velocity magnitude on the wall ``r = +-1``, ``z = +-1``."""
    vals = pt_synthesize(v).values()
    return float(max(
        max(np.max(np.abs(c[:, :, 0])), np.max(np.abs(c[:, :, -1])),
            np.max(np.abs(c[:, 0, :])), np.max(np.abs(c[:, -1, :])))
        for c in vals
    ))


def _dealias(c: CoeffTensor) -> CoeffTensor:
    spec = c.spec
    keep_r = np.arange(spec.m) < (2 * spec.m) // 3
    keep_z = np.arange(spec.n) < (2 * spec.n) // 3
    keep_t = np.abs(spec.wavenumbers()) <= spec.p // 3
    mask = keep_t[:, None, None] & keep_z[None, :, None] & keep_r[None, None, :]
    return CoeffTensor(spec, np.where(mask, c.data, 0.0))


def _drop_nyquist(c: CoeffTensor) -> CoeffTensor:
    """Zero the unpaired ``w = -p/2`` mode of an even-``p`` tensor.

    For that mode the first ``theta`` derivative is dropped while the second is
    kept, so ``d_theta d_theta != d_thetatheta`` there and the discrete
    poloidal-toroidal identities fail on it.
    """
    if c.spec.p % 2:
        return c
    data = c.data.copy()
    data[0] = 0.0
    return CoeffTensor(c.spec, data)


def nonlinear_term(v: PTScalars, omega: PTScalars, dealias: bool = False) -> PTScalars:
    """Scalars of ``curl(v x omega)`` from a pointwise product on the grid.

    The product excites the unpaired Nyquist angle mode through aliasing;
    that mode is removed from the result (see :func:`_drop_nyquist`).
    """
    spec = v.spec
    _require_even(spec)
    vr, vt, vz = pt_synthesize(v).values()
    wr, wt, wz = pt_synthesize(omega).values()
    cross = VectorFieldCoeffs.from_values(
        spec, vt * wz - vz * wt, vz * wr - vr * wz, vr * wt - vt * wr
    )
    if dealias:
        cross = VectorFieldCoeffs(*(_dealias(c) for c in cross.components))
    out = pt_decompose(curl(cross), check_divergence=False)
    return PTScalars(_drop_nyquist(out.lam), _drop_nyquist(out.gam))


def advective_term(V: VectorFieldCoeffs) -> VectorFieldCoeffs:
    """``(V . grad) V`` in cylindrical components (independent of the cross-product route)."""
    spec = V.spec
    _require_even(spec)
    R = _radius(spec)
    vr, vt, vz = V.values()

    def dot_grad(c: CoeffTensor) -> np.ndarray:
        return vr * _values(c, r=1) + vt * _values(c, t=1) / R + vz * _values(c, z=1)

    ar = dot_grad(V.comp_r) - vt * vt / R
    at = dot_grad(V.comp_theta) + vr * vt / R
    az = dot_grad(V.comp_z)
    return VectorFieldCoeffs.from_values(spec, ar, at, az)


# --------------------------------------------------------------------------
# time stepping


@dataclass(frozen=True)
class NSState:
    """Newest-first histories of vorticity scalars and nonlinear-term scalars."""

    omega: tuple
    nonlinear: tuple
    reynolds: float
    h: float
    order: int = 4
    time: float = 0.0
    startup: str = "extrapolated"
    include_nonlinear: bool = True
    dealias: bool = False
    tol: float = DEFAULT_TOL
    steps: int = 0

    def __post_init__(self):
        BDFScheme(self.order, self.h)
        if self.reynolds <= 0:
            raise ValueError("Reynolds number must be positive")
        if self.startup not in ("extrapolated", "ramp"):
            raise ValueError("startup must be 'extrapolated' or 'ramp'")

    @classmethod
    def initial(cls, omega0: PTScalars, reynolds: float, h: float, **kwargs) -> "NSState":
        return cls((omega0,), (), float(reynolds), float(h), **kwargs)

    @property
    def current(self) -> PTScalars:
        return self.omega[0]


def _explicit(state: NSState, omega: PTScalars) -> PTScalars:
    if not state.include_nonlinear:
        return PTScalars.zeros(omega.spec)
    v = velocity_from_vorticity(omega, state.tol)
    return nonlinear_term(v, omega, state.dealias)


def _implicit(rhs: PTScalars, scale: float, tol: float) -> PTScalars:
    lam = solve_helmholtz_3d(rhs.lam, scale, HOMOGENEOUS, tol)
    gam = solve_helmholtz_3d(rhs.gam, scale, HOMOGENEOUS, tol)
    return PTScalars(lam, gam)


def _combine(weights, items) -> PTScalars:
    lam = sum(w * s.lam.data for w, s in zip(weights, items))
    gam = sum(w * s.gam.data for w, s in zip(weights, items))
    spec = items[0].spec
    return PTScalars(CoeffTensor(spec, lam), CoeffTensor(spec, gam))


def _extrapolated_imex_euler(state: NSState, a0: PTScalars) -> PTScalars:
    """IMEX Euler on 1..b substeps, extrapolated to zero substep size."""
    b, h = state.order, state.h
    omega0 = state.current
    results = []
    for k in range(1, b + 1):
        dt = h / k
        w, a = omega0, a0
        for i in range(k):
            if i > 0:
                a = _explicit(state, w)
            w = _implicit(w + dt * a, dt / state.reynolds, state.tol)
        results.append(w)
    xs = [h / k for k in range(1, b + 1)]
    tab = list(results)
    for level in range(1, b):
        for i in range(b - 1, level - 1, -1):
            x_hi, x_lo = xs[i - level], xs[i]
            tab[i] = _combine([x_hi / (x_hi - x_lo), -x_lo / (x_hi - x_lo)], [tab[i], tab[i - 1]])
    return tab[b - 1]


def ns_step(state: NSState) -> NSState:
    """One IMEX-BDF step of ``(d_t - Laplacian/Re) omega_scalars = a_scalars``.

    The explicit term is the curl of ``v x omega``, extrapolated from the
    stored history with the IMEX weights; the implicit part is two Helmholtz
    solves with scale ``kappa / Re`` and homogeneous Dirichlet walls.
    """
    a_now = _explicit(state, state.current)
    nl_hist = (a_now,) + tuple(state.nonlinear[: state.order - 1])
    if len(state.omega) < state.order and state.startup == "extrapolated":
        new = _extrapolated_imex_euler(state, a_now)
    else:
        order = min(len(state.omega), state.order)
        scheme = BDFScheme(order, state.h)
        delta = PTScalars(
            bdf_rhs([s.lam for s in state.omega], scheme),
            bdf_rhs([s.gam for s in state.omega], scheme),
        )
        extrap = _combine(imex_coefficients(order), nl_hist[:order])
        new = _implicit(delta + scheme.kappa * extrap, scheme.kappa / state.reynolds, state.tol)
    if not (np.all(np.isfinite(new.lam.data)) and np.all(np.isfinite(new.gam.data))):
        raise NumericalError(f"non-finite vorticity at step {state.steps + 1}")
    omega_hist = (new,) + tuple(state.omega[: state.order - 1])
    return replace(state, omega=omega_hist, nonlinear=nl_hist, time=state.time + state.h,
                   steps=state.steps + 1)


def ns_run(state: NSState, steps: int, callback=None) -> NSState:
    """Advance ``steps`` steps; ``callback(state)`` is called after each one."""
    for _ in range(steps):
        state = ns_step(state)
        if callback is not None:
            callback(state)
    return state


def ns_diagnostics(state: NSState) -> dict:
    """Kinetic-energy proxy, velocity divergence and wall slip of the current state."""
    v = velocity_from_vorticity(state.current, state.tol)
    V = pt_synthesize(v)
    vals = V.values()
    energy = float(sum(np.mean(np.abs(c) ** 2) for c in vals) / 2)
    return {
        "time": state.time,
        "energy": energy,
        "max_divergence": divergence(V).max_abs(),
        "wall_slip": no_slip_residual(v),
        "max_vorticity_scalar": state.current.max_abs(),
    }
