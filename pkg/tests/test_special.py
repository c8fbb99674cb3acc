import math

import numpy as np
import pytest
from scipy.special import ellipj, ellipk, ellipkm1

from cylspec.special import MobiusMap, agm, elliptic_K, jacobi_dn, jacobi_sn_cn_dn, mobius_from_points


def test_K_zero():
    assert elliptic_K(0.0) == pytest.approx(math.pi / 2, rel=1e-15)


@pytest.mark.parametrize("k", [0.1, 0.5, 0.9, 0.999, 0.999999])
def test_K_matches_scipy(k):
    assert elliptic_K(k) == pytest.approx(ellipkm1((1 - k) * (1 + k)), rel=1e-13)


def test_K_half_value():
    assert elliptic_K(0.5) == pytest.approx(1.6857503548125961, rel=1e-15)


def test_K_complementary_modulus_near_one():
    kp = 1e-9
    assert elliptic_K(kprime=kp) == pytest.approx(ellipkm1(kp * kp), rel=1e-13)
    assert math.isfinite(elliptic_K(kprime=kp))


@pytest.mark.parametrize("k", [1.0, 1.5, -0.1])
def test_K_domain(k):
    with pytest.raises(ValueError):
        elliptic_K(k)


def test_agm_converges_quickly():
    k = 0.999
    value, iterations = agm(1.0, math.sqrt((1 - k) * (1 + k)))
    assert iterations <= 8
    assert math.pi / (2 * value) == pytest.approx(ellipkm1((1 - k) * (1 + k)), rel=1e-14)


def test_dn_trivial_values():
    assert jacobi_dn(0.0, 0.7) == pytest.approx(1.0)
    assert jacobi_dn(1.3, 0.0) == pytest.approx(1.0)


@pytest.mark.parametrize("k", [0.3, 0.8, 0.99])
def test_dn_quarter_period(k):
    assert jacobi_dn(elliptic_K(k), k) == pytest.approx(math.sqrt(1 - k * k), rel=1e-12)


def test_sn_cn_dn_match_scipy():
    rng = np.random.default_rng(11)
    for _ in range(20):
        k = rng.uniform(0, 0.999)
        u = rng.uniform(-3, 3)
        sn, cn, dn = jacobi_sn_cn_dn(u, k)
        ref = ellipj(u, k * k)
        assert np.allclose([sn, cn, dn], ref[:3], atol=1e-12)
        assert dn**2 + k * k * sn**2 == pytest.approx(1.0, abs=1e-12)


def test_dn_range_vectorised():
    k = 0.95
    u = np.linspace(0, elliptic_K(k), 50)
    dn = jacobi_dn(u, k)
    assert np.all(dn <= 1 + 1e-15) and np.all(dn >= math.sqrt(1 - k * k) - 1e-15)


def test_mobius_identity():
    pts = [-3.0, -1.0, 1.0, 3.0]
    T = mobius_from_points(pts, pts)
    assert np.allclose(T(np.array([0.2, 5.0, -7.0])), [0.2, 5.0, -7.0])


def test_mobius_linear_example():
    T = mobius_from_points([-2.0, -1.0, 1.0, 2.0], [-4.0, -2.0, 2.0, 4.0])
    assert np.allclose(T(np.array([-2.0, -1.0, 1.0, 2.0])), [-4, -2, 2, 4], atol=1e-12)
    assert T(0.3) == pytest.approx(0.6)


def _cross_ratio(a, b, c, d):
    return (a - c) * (b - d) / ((a - d) * (b - c))


def test_mobius_preserves_cross_ratio():
    alpha = 3.7
    src = [-alpha, -1.0, 1.0, alpha]
    ref = MobiusMap(2.0, -1.0, 0.1, 5.0)
    dst = [float(ref(x)) for x in src]
    T = mobius_from_points(src, dst)
    assert np.allclose(T(np.array(src)), dst, atol=1e-12 * 50)
    x, y = 0.4, -2.5
    assert _cross_ratio(T(x), T(y), T(1.0), T(alpha)) == pytest.approx(_cross_ratio(x, y, 1.0, alpha), rel=1e-10)


def test_mobius_composition_fixes_points():
    P = [-4.0, -1.0, 1.0, 4.0]
    Q = [float(MobiusMap(1.0, 3.0, 0.2, 7.0)(x)) for x in P]
    S = [float(MobiusMap(-2.0, 1.0, 0.05, 1.0)(x)) for x in P]
    f = mobius_from_points(P, Q)
    g = mobius_from_points(S, Q)
    chain = g.inverse().compose(f)
    assert np.allclose(chain(np.array(P)), S, atol=1e-10)


def test_mobius_degenerate():
    with pytest.raises(ValueError):
        mobius_from_points([-1.0, -1.0, 1.0, 2.0], [0.0, 1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        MobiusMap(1.0, 2.0, 2.0, 4.0)
