"""Manufactured solutions and axis-regular test fields.

Fields built from polynomials in ``x = r cos(theta)``, ``y = r sin(theta)`` and
``z`` are smooth across the axis.  This is the class on which the value-space
``1/r`` factors in :mod:`cylspec.ptns` are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .grid import GridField, GridSpec, grid_mesh
from .transform import analyze


@dataclass(frozen=True)
class CartesianPolynomial:
    """``sum c[a, b, c] x^a y^b z^c`` with an optional wall factor.

    ``wall`` is a string of flags: every ``"r"`` multiplies by ``(1 - r^2)`` and
    every ``"z"`` by ``(1 - z^2)``, so ``"rrzz"`` vanishes to second order on
    the whole wall.
    """

    coeffs: dict
    wall: str = ""

    @classmethod
    def random(cls, degree: int, rng: np.random.Generator, wall: str = "") -> "CartesianPolynomial":
        coeffs = {}
        for a, b, c in product(range(degree + 1), repeat=3):
            if a + b + c <= degree:
                coeffs[(a, b, c)] = float(rng.standard_normal())
        return cls(coeffs, wall)

    @property
    def degree(self) -> int:
        base = max(a + b + c for a, b, c in self.coeffs)
        return base + 2 * len(self.wall)

    def __call__(self, R, Z, T):
        X, Y = R * np.cos(T), R * np.sin(T)
        out = np.zeros(np.broadcast(R, Z, T).shape)
        for (a, b, c), v in self.coeffs.items():
            out = out + v * X**a * Y**b * Z**c
        out = out * (1 - R**2) ** self.wall.count("r")
        out = out * (1 - Z**2) ** self.wall.count("z")
        return out

    def field(self, spec: GridSpec) -> GridField:
        return GridField.from_function(spec, self)

    def coeffs_on(self, spec: GridSpec):
        return analyze(self.field(spec))


# --------------------------------------------------------------------------
# heat problem: T = exp(-t) (1 - r^2)(1 - z^2)


def heat_exact(R, Z, T, t):
    return np.exp(-t) * (1 - R**2) * (1 - Z**2)


def heat_forcing(R, Z, T, t, alpha=1.0):
    """``T_t - alpha Laplacian T`` for :func:`heat_exact`."""
    return np.exp(-t) * (-(1 - R**2) * (1 - Z**2) + alpha * (4 * (1 - Z**2) + 2 * (1 - R**2)))


def heat_problem(spec: GridSpec, alpha: float = 1.0):
    """``(initial GridField, forcing callback, exact(t) -> ndarray)`` on ``spec``."""
    R, Z, T = grid_mesh(spec)

    def forcing(t):
        return GridField(spec, heat_forcing(R, Z, T, t, alpha))

    def exact(t):
        return heat_exact(R, Z, T, t)

    return GridField(spec, exact(0.0)), forcing, exact


# --------------------------------------------------------------------------
# Poisson problem with a non-polynomial solution


def poisson_exact(R, Z, T):
    """``sin(pi z)(e^{r^2} - e) + (1 - z^2) e^z r (1 - r^2) e^{r^2} cos(theta)``."""
    e = np.e
    g = np.exp(R**2)
    return np.sin(np.pi * Z) * (g - e) + (1 - Z**2) * np.exp(Z) * R * (1 - R**2) * g * np.cos(T)


def poisson_rhs(R, Z, T):
    """Laplacian of :func:`poisson_exact`, worked out by hand and checked symbolically in the tests."""
    e = np.e
    g = np.exp(R**2)
    # axisymmetric part: sin(pi z) [ (e^{r^2})'' + (e^{r^2})'/r ] - pi^2 sin(pi z)(e^{r^2} - e)
    lap_g = (4 + 4 * R**2) * g
    part1 = np.sin(np.pi * Z) * lap_g - np.pi**2 * np.sin(np.pi * Z) * (g - e)
    # w = 1 part: Z(z) f(r) cos(theta) with f = (r - r^3) e^{r^2}; the modal
    # operator f'' + f'/r - f/r^2 simplifies to -(12 r^3 + 4 r^5) e^{r^2}
    f = (R - R**3) * g
    radial = -(12 * R**3 + 4 * R**5) * g
    zz = (1 - Z**2) * np.exp(Z)
    zpp = (-1 - 4 * Z - Z**2) * np.exp(Z)
    part2 = (zz * radial + zpp * f) * np.cos(T)
    return part1 + part2
