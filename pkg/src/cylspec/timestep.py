"""BDF time stepping for the heat equation ``T_t = alpha Laplacian T + g``.

A step of order ``b`` solves one Helmholtz problem::

    (1 - kappa alpha Laplacian) T(t+h) = delta(T) + kappa g

with ``delta`` the weighted history and ``kappa`` the implicit coefficient
(``kappa = h`` for BDF1, ``12 h / 25`` for BDF4).

Startup: a multistep method needs ``b`` past values.  The default
``startup="extrapolated"`` builds them with implicit Euler on 1, 2, ..., b
substeps followed by polynomial (Aitken-Neville) extrapolation in the
substep size, which is an order-``b`` one-step method.  ``startup="ramp"``
uses BDF1, BDF2, ... for the first steps instead.  The ramp is cheaper, but
its low-order first steps leave an ``O(h^2)`` error that weakly damped modes
carry to the end of the run.

Forcing: ``"lagged"`` uses ``g(t)`` for the step to ``t + h``;
``"exact"`` uses ``g(t + h)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .adi import DEFAULT_TOL
from .errors import NumericalError
from .grid import CoeffTensor, GridField
from .solvers import HOMOGENEOUS, BoundaryCondition, solve_helmholtz_3d
from .transform import analyze, synthesize

__all__ = [
    "BDFScheme",
    "HeatConfig",
    "HeatState",
    "Trajectory",
    "bdf_rhs",
    "imex_coefficients",
    "heat_step",
    "heat_run",
    "extrapolated_euler_step",
]

_BDF = {
    1: ([1.0], 1.0),
    2: ([4 / 3, -1 / 3], 2 / 3),
    3: ([18 / 11, -9 / 11, 2 / 11], 6 / 11),
    4: ([48 / 25, -36 / 25, 16 / 25, -3 / 25], 12 / 25),
}

_IMEX = {
    1: [1.0],
    2: [2.0, -1.0],
    3: [3.0, -3.0, 1.0],
    4: [4.0, -6.0, 4.0, -1.0],
}


@dataclass(frozen=True)
class BDFScheme:
    """BDF of order ``b`` with step ``h``; ``kappa`` already includes ``h``."""

    order: int
    h: float = 1.0

    def __post_init__(self):
        if self.order not in _BDF:
            raise ValueError(f"BDF order must be 1..4, got {self.order}")
        if not self.h > 0:
            raise ValueError("time step must be positive")

    @property
    def history_weights(self) -> np.ndarray:
        return np.array(_BDF[self.order][0])

    @property
    def kappa(self) -> float:
        return _BDF[self.order][1] * self.h

    def with_order(self, order: int) -> "BDFScheme":
        return replace(self, order=order)


def imex_coefficients(order: int) -> np.ndarray:
    """Extrapolation weights for an explicit term at ``t + h`` from ``t, t-h, ...``."""
    if order not in _IMEX:
        raise ValueError(f"IMEX order must be 1..4, got {order}")
    return np.array(_IMEX[order])


def _combine(weights, tensors: Sequence[CoeffTensor]) -> CoeffTensor:
    data = sum(w * t.data for w, t in zip(weights, tensors))
    return CoeffTensor(tensors[0].spec, data)


def bdf_rhs(history: Sequence[CoeffTensor], scheme: BDFScheme) -> CoeffTensor:
    """``delta(T) = sum_i w_i T(t - i h)``; ``history[0]`` is the newest value."""
    if len(history) < scheme.order:
        raise ValueError(f"BDF{scheme.order} needs {scheme.order} history values, got {len(history)}")
    return _combine(scheme.history_weights, history)


Forcing = Callable[[float], "CoeffTensor | GridField | None"]


@dataclass(frozen=True)
class HeatConfig:
    alpha: float = 1.0
    h: float = 0.01
    order: int = 4
    bc: BoundaryCondition = HOMOGENEOUS
    forcing_mode: str = "lagged"
    startup: str = "extrapolated"
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.forcing_mode not in ("lagged", "exact"):
            raise ValueError("forcing_mode must be 'lagged' or 'exact'")
        if self.startup not in ("extrapolated", "ramp"):
            raise ValueError("startup must be 'extrapolated' or 'ramp'")
        if self.alpha < 0:
            raise ValueError("diffusivity must be non-negative")
        BDFScheme(self.order, self.h)

    @property
    def scheme(self) -> BDFScheme:
        return BDFScheme(self.order, self.h)


@dataclass(frozen=True)
class HeatState:
    """Newest-first history of temperature coefficients."""

    history: tuple
    time: float
    config: HeatConfig

    @classmethod
    def initial(cls, T0: CoeffTensor | GridField, config: HeatConfig, time: float = 0.0):
        return cls((_as_coeffs(T0),), float(time), config)

    @property
    def current(self) -> CoeffTensor:
        return self.history[0]


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    fields: list = field(default_factory=list)

    def append(self, t, f):
        self.times.append(t)
        self.fields.append(f)


def _as_coeffs(x) -> CoeffTensor | None:
    if x is None or isinstance(x, CoeffTensor):
        return x
    if isinstance(x, GridField):
        return analyze(x)
    raise TypeError(f"expected CoeffTensor or GridField, got {type(x).__name__}")


def _forcing_at(g, t: float) -> CoeffTensor | None:
    return _as_coeffs(g(t)) if callable(g) else _as_coeffs(g)


def _implicit_solve(rhs: CoeffTensor, scale: float, config: HeatConfig) -> CoeffTensor:
    out = solve_helmholtz_3d(rhs, scale, config.bc, config.tol)
    if not np.all(np.isfinite(out.data)):
        raise NumericalError("non-finite values in the Helmholtz solve")
    return out


def extrapolated_euler_step(T: CoeffTensor, t: float, g, config: HeatConfig, order: int) -> CoeffTensor:
    """One step of implicit Euler extrapolated to ``order`` (substeps 1..order).

    ``g`` is a callable of time, a fixed tensor, or ``None``; substeps evaluate
    a callable at the end of each substep.
    """
    h, alpha = config.h, config.alpha
    values = []
    for k in range(1, order + 1):
        dt = h / k
        U = T
        for i in range(1, k + 1):
            rhs = U
            gi = _forcing_at(g, t + i * dt)
            if gi is not None:
                rhs = rhs + dt * gi
            U = _implicit_solve(rhs, dt * alpha, config)
        values.append(U.data)
    # Aitken-Neville in the substep size x_k = h/k, extrapolated to x = 0
    xs = [h / k for k in range(1, order + 1)]
    tab = list(values)
    for level in range(1, order):
        for i in range(order - 1, level - 1, -1):
            x_hi, x_lo = xs[i - level], xs[i]
            tab[i] = (x_hi * tab[i] - x_lo * tab[i - 1]) / (x_hi - x_lo)
    return CoeffTensor(T.spec, tab[order - 1])


def heat_step(state: HeatState, g=None) -> HeatState:
    """Advance by one step.

    ``g`` may be a forcing tensor (used as is), a :class:`GridField`, or a
    callable of time.  A callable is evaluated at ``t`` or ``t + h`` according
    to ``config.forcing_mode``.
    """
    cfg = state.config
    scheme = cfg.scheme
    hist = state.history
    t = state.time
    if len(hist) < scheme.order and cfg.startup == "extrapolated":
        new = extrapolated_euler_step(hist[0], t, g, cfg, scheme.order)
    else:
        order = min(len(hist), scheme.order)
        sch = scheme.with_order(order)
        rhs = bdf_rhs(hist, sch)
        t_g = t + cfg.h if cfg.forcing_mode == "exact" else t
        gt = _forcing_at(g, t_g)
        if gt is not None:
            rhs = rhs + sch.kappa * gt
        new = _implicit_solve(rhs, sch.kappa * cfg.alpha, cfg)
    history = (new,) + tuple(hist[: scheme.order - 1])
    return HeatState(history, t + cfg.h, cfg)


def heat_run(config: HeatConfig, initial: GridField | CoeffTensor, forcing: Forcing | None = None,
             steps: int = 1, output_every: int = 1, t0: float = 0.0, as_coeffs: bool = False) -> Trajectory:
    """Run ``steps`` BDF steps, keeping every ``output_every``-th snapshot.

    The initial field is always the first snapshot; the last step is always
    recorded.  Snapshots are :class:`GridField`s unless ``as_coeffs`` is set.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if output_every < 1:
        raise ValueError("output_every must be positive")
    state = HeatState.initial(initial, config, t0)
    traj = Trajectory()

    def record(s: HeatState):
        traj.append(s.time, s.current if as_coeffs else synthesize(s.current, real=True))

    record(state)
    for i in range(1, steps + 1):
        try:
            state = heat_step(state, forcing)
        except NumericalError as exc:
            raise NumericalError(f"step {i}: {exc}") from exc
        if i % output_every == 0 or i == steps:
            record(state)
    return traj
