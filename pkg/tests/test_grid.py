import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cylspec.grid import (
    CoeffTensor,
    GridField,
    GridSpec,
    check_physical_consistency,
    chebyshev_points,
    doubling_defect,
    fourier_points,
    grid_points,
    parity_project,
)
from cylspec.transform import analyze

from conftest import field_of, smooth_field


def test_radial_points_three():
    assert np.array_equal(chebyshev_points(3), [-1.0, 0.0, 1.0])


def test_radial_points_two():
    assert np.array_equal(chebyshev_points(2), [-1.0, 1.0])


def test_theta_points_four():
    assert np.allclose(fourier_points(4), [-np.pi, -np.pi / 2, 0.0, np.pi / 2], atol=0)


def test_grid_points_formula_and_order():
    spec = GridSpec(5, 6, 4)
    pts = grid_points(spec)
    assert pts.shape == (spec.N, 3)
    m, n, p = spec.m, spec.n, spec.p
    for idx in [0, 7, 33, spec.N - 1]:
        l, rem = divmod(idx, m * n)
        k, j = divmod(rem, m)
        expected = (np.cos((m - j - 1) * np.pi / (m - 1)), np.cos((n - k - 1) * np.pi / (n - 1)),
                    (2 * l - p) * np.pi / p)
        assert np.allclose(pts[idx], expected, atol=1e-15)


def test_axes_increasing_and_equispaced():
    r = chebyshev_points(9)
    assert np.all(np.diff(r) > 0)
    th = fourier_points(8)
    assert np.allclose(np.diff(th), 2 * np.pi / 8)


@pytest.mark.parametrize("m,n,p", [(3, 8, 8), (8, 2, 8), (8, 8, 1)])
def test_invalid_spec(m, n, p):
    with pytest.raises(ValueError):
        GridSpec(m, n, p)


def test_non_integer_spec():
    with pytest.raises(TypeError):
        GridSpec(8.0, 8, 8)


def test_odd_p_allowed_but_not_doubled():
    spec = GridSpec(7, 7, 7)
    assert spec.N == 343 and not spec.doubled
    with pytest.raises(ValueError):
        check_physical_consistency(GridField(spec, np.ones(spec.shape)), 1e-12)


def test_field_length_checked():
    with pytest.raises(ValueError):
        GridField(GridSpec(4, 4, 4), np.ones(10))


def test_consistency_constant():
    spec = GridSpec(6, 5, 8)
    assert check_physical_consistency(GridField(spec, np.ones(spec.shape)), 1e-14)


def test_consistency_r_cos_theta():
    spec = GridSpec(7, 5, 8)
    f = field_of(spec, lambda R, Z, T: R * np.cos(T))
    assert check_physical_consistency(f, 1e-14)


def test_consistency_single_perturbation():
    spec = GridSpec(6, 5, 8)
    v = np.ones(spec.shape)
    v[3, 2, 1] += 1e-6
    assert not check_physical_consistency(GridField(spec, v), 1e-9)


def test_odd_function_breaks_consistency():
    spec = GridSpec(6, 5, 8)
    assert doubling_defect(field_of(spec, lambda R, Z, T: R)) > 1.0


def _delta(spec, j, k, l):
    d = np.zeros(spec.shape, dtype=complex)
    d[l, k, j] = 1.0
    return CoeffTensor(spec, d)


def test_parity_project_examples():
    spec = GridSpec(6, 5, 8)
    h = spec.p // 2
    assert parity_project(_delta(spec, 0, 0, h + 1)).max_abs() == 0.0
    kept = parity_project(_delta(spec, 1, 0, h + 1))
    assert kept == _delta(spec, 1, 0, h + 1)
    assert parity_project(CoeffTensor.zeros(spec)).max_abs() == 0.0


@settings(max_examples=25, deadline=None)
@given(st.integers(4, 9), st.integers(4, 7), st.integers(2, 9), st.integers(0, 2**31 - 1))
def test_parity_project_idempotent(m, n, p, seed):
    spec = GridSpec(m, n, p)
    rng = np.random.default_rng(seed)
    c = CoeffTensor(spec, rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape))
    once = parity_project(c)
    assert parity_project(once) == once


def test_physical_fields_are_parity_clean(rng):
    spec = GridSpec(12, 9, 10)
    for _ in range(5):
        f = smooth_field(spec, rng, degree=5)
        assert check_physical_consistency(f, 1e-13)
        c = analyze(f)
        assert (parity_project(c) - c).max_abs() <= 1e-12


def test_field_arithmetic():
    spec = GridSpec(4, 4, 2)
    a = GridField(spec, np.ones(spec.shape))
    b = a * 2.0 - a
    assert b == a
    assert (-a).max_abs() == 1.0
