import numpy as np
import sympy as sy

from cylspec.grid import GridSpec, grid_mesh
from cylspec.manufactured import (
    CartesianPolynomial,
    heat_exact,
    heat_forcing,
    heat_problem,
    poisson_exact,
    poisson_rhs,
)

r, z, th, t, a = sy.symbols("r z theta t alpha", real=True)


def cyl_laplacian(u):
    return sy.diff(u, r, 2) + sy.diff(u, r) / r + sy.diff(u, th, 2) / r**2 + sy.diff(u, z, 2)


def sample_points(rng, count=40):
    # avoid r = 0 where the symbolic 1/r terms are singular
    return rng.uniform(0.05, 1, count), rng.uniform(-1, 1, count), rng.uniform(-np.pi, np.pi, count)


def test_poisson_rhs_is_symbolic_laplacian(rng):
    u = (sy.sin(sy.pi * z) * (sy.exp(r**2) - sy.E)
         + (1 - z**2) * sy.exp(z) * r * (1 - r**2) * sy.exp(r**2) * sy.cos(th))
    f = sy.lambdify((r, z, th), cyl_laplacian(u), "numpy")
    uf = sy.lambdify((r, z, th), u, "numpy")
    R, Z, T = sample_points(rng)
    assert np.allclose(poisson_exact(R, Z, T), uf(R, Z, T), atol=1e-13)
    assert np.allclose(poisson_rhs(R, Z, T), f(R, Z, T), rtol=1e-12, atol=1e-11)


def test_poisson_exact_vanishes_on_wall():
    s = np.linspace(-np.pi, np.pi, 9)
    zz = np.linspace(-1, 1, 9)
    assert np.max(np.abs(poisson_exact(np.ones_like(zz), zz, s))) <= 1e-14
    assert np.max(np.abs(poisson_exact(np.linspace(0, 1, 9), np.ones(9), s))) <= 1e-14


def test_heat_forcing_is_symbolic_residual(rng):
    u = sy.exp(-t) * (1 - r**2) * (1 - z**2)
    g = sy.lambdify((r, z, th, t, a), sy.diff(u, t) - a * cyl_laplacian(u), "numpy")
    R, Z, T = sample_points(rng)
    for time, alpha in [(0.0, 1.0), (0.7, 0.3), (2.0, 0.0)]:
        assert np.allclose(heat_forcing(R, Z, T, time, alpha), g(R, Z, T, time, alpha), atol=1e-13)
        ref = sy.lambdify((r, z, th, t), u, "numpy")(R, Z, T, time)
        assert np.allclose(heat_exact(R, Z, T, time), ref, atol=1e-15)


def test_heat_problem_on_grid():
    spec = GridSpec(6, 5, 4)
    init, forcing, exact = heat_problem(spec, alpha=0.5)
    R, Z, T = grid_mesh(spec)
    assert np.array_equal(init.values, exact(0.0))
    assert np.allclose(forcing(0.3).values, heat_forcing(R, Z, T, 0.3, 0.5))


def test_cartesian_polynomial_is_single_valued(rng):
    # the same physical point seen as (r, theta) and (-r, theta + pi) gives one value
    poly = CartesianPolynomial.random(4, rng, "rz")
    R, Z, T = sample_points(rng)
    assert np.allclose(poly(R, Z, T), poly(-R, Z, T + np.pi), atol=1e-13)
    assert poly.degree == 8


def test_cartesian_polynomial_wall_factor(rng):
    poly = CartesianPolynomial.random(3, rng, "rrz")
    s = np.linspace(-np.pi, np.pi, 7)
    assert np.max(np.abs(poly(np.ones(7), np.linspace(-1, 1, 7), s))) <= 1e-14
    assert np.max(np.abs(poly(np.linspace(0, 1, 7), -np.ones(7), s))) <= 1e-14
