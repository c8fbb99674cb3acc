"""Elliptic functions and Möbius maps used to place the ADI shifts.

Everything here is real-argument only.  Moduli close to one are best passed
through their complement ``k' = sqrt(1 - k**2)``, which is what the shift
planner naturally has at hand (``k' = 1/alpha``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MobiusMap",
    "agm",
    "elliptic_K",
    "jacobi_dn",
    "jacobi_sn_cn_dn",
    "mobius_from_points",
]

_MAX_AGM = 40


def _complement(k: float | None, kprime: float | None) -> tuple[float, float]:
    if kprime is None:
        if k is None:
            raise ValueError("need k or kprime")
        k = float(k)
        if not 0.0 <= k < 1.0:
            raise ValueError(f"modulus must lie in [0, 1), got {k}")
        return k, math.sqrt((1.0 - k) * (1.0 + k))
    kprime = float(kprime)
    if not 0.0 < kprime <= 1.0:
        raise ValueError(f"complementary modulus must lie in (0, 1], got {kprime}")
    if k is None:
        k = math.sqrt((1.0 - kprime) * (1.0 + kprime))
    return float(k), kprime


_EPS = float(np.finfo(float).eps)


def agm(a: float, b: float, tol: float = 4 * _EPS) -> tuple[float, int]:
    """Arithmetic-geometric mean of ``a, b > 0`` and the number of steps taken.

    Stops once the two means agree to ``tol`` relative (a few ulps by default)
    or stop changing.
    """
    if a <= 0 or b <= 0:
        raise ValueError("AGM needs positive arguments")
    for it in range(_MAX_AGM):
        if abs(a - b) <= tol * a:
            return a, it
        a_new, b_new = 0.5 * (a + b), math.sqrt(a * b)
        if a_new == a and b_new == b:
            return a, it
        a, b = a_new, b_new
    return a, _MAX_AGM


def elliptic_K(k: float | None = None, kprime: float | None = None) -> float:
    """Complete elliptic integral of the first kind, ``pi / (2 AGM(1, k'))``.

    ``k`` is the modulus (not the parameter ``m = k**2``).  Supplying ``kprime``
    avoids the cancellation in ``1 - k**2`` when ``k`` is close to one.
    """
    _, kp = _complement(k, kprime)
    mean, _ = agm(1.0, kp)
    return math.pi / (2.0 * mean)


def jacobi_sn_cn_dn(u, k: float | None = None, kprime: float | None = None):
    """``(sn, cn, dn)`` by the descending Landen (AGM) scheme.

    Works elementwise on arrays.  Starting from ``a_0 = 1, b_0 = k'`` the AGM is
    run to convergence, ``phi_N = 2^N a_N u`` is formed and the amplitude is
    recovered by ``phi_{n-1} = (phi_n + asin(c_n/a_n sin phi_n)) / 2``.
    """
    kk, kp = _complement(k, kprime)
    u = np.asarray(u, dtype=float)
    if kk == 0.0:
        return np.sin(u), np.cos(u), np.ones_like(u)
    a, b, c = [1.0], [kp], [kk]
    while abs(c[-1]) > 1e-16 * a[-1] and len(a) < _MAX_AGM:
        an, bn = a[-1], b[-1]
        a.append(0.5 * (an + bn))
        b.append(math.sqrt(an * bn))
        c.append(0.5 * (an - bn))
    N = len(a) - 1
    phi = (2.0**N) * a[N] * u
    for i in range(N, 0, -1):
        phi = 0.5 * (phi + np.arcsin(np.clip(c[i] / a[i] * np.sin(phi), -1.0, 1.0)))
    sn = np.sin(phi)
    cn = np.cos(phi)
    # the textbook ratio cos(phi_0)/cos(phi_1 - phi_0) is 0/0 at odd quarter
    # periods; k'^2 + k^2 cn^2 = 1 - k^2 sn^2 has no cancellation and no pole
    dn = np.sqrt(kp * kp + kk * kk * cn * cn)
    if u.ndim == 0:
        return float(sn), float(cn), float(dn)
    return sn, cn, dn


def jacobi_dn(u, k: float | None = None, kprime: float | None = None):
    """Jacobi ``dn(u, k)`` for real ``u`` and modulus ``0 <= k < 1``."""
    return jacobi_sn_cn_dn(u, k, kprime)[2]


@dataclass(frozen=True)
class MobiusMap:
    """``t -> (a t + b) / (c t + d)``."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        if scale == 0 or abs(det) <= 1e-14 * scale * scale:
            raise ValueError("degenerate Möbius map")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __call__(self, t):
        t = np.asarray(t)
        out = (self.a * t + self.b) / (self.c * t + self.d)
        if np.isrealobj(t) and all(np.imag(x) == 0 for x in (self.a, self.b, self.c, self.d)):
            out = np.real(out)
        return out[()] if out.ndim == 0 else out

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    def compose(self, other: "MobiusMap") -> "MobiusMap":
        """``self o other``."""
        m = self.matrix @ other.matrix
        return MobiusMap(*m.ravel())


def _to_zero_one_inf(z1, z2, z3) -> np.ndarray:
    # the map sending z1 -> 0, z2 -> 1, z3 -> infinity
    return np.array([[z2 - z3, -z1 * (z2 - z3)], [z2 - z1, -z3 * (z2 - z1)]])


def mobius_from_points(source, target, tol: float = 1e-10) -> MobiusMap:
    """Möbius map taking the four ``source`` points to the four ``target`` points.

    Three points fix the map; the fourth is checked, which amounts to the two
    quadruples having equal cross-ratios.
    """
    source = [float(s) if np.isreal(s) else complex(s) for s in source]
    target = [float(s) if np.isreal(s) else complex(s) for s in target]
    if len(source) != 4 or len(target) != 4:
        raise ValueError("need exactly four source and four target points")
    for pts in (source, target):
        if len({complex(x) for x in pts}) != 4:
            raise ValueError("degenerate Möbius map: repeated points")
    m_src = _to_zero_one_inf(*source[:3])
    m_tgt = _to_zero_one_inf(*target[:3])
    # normalise to avoid huge/small entries for widely spread points
    mat = np.linalg.solve(m_tgt, m_src)
    mat = mat / np.max(np.abs(mat))
    if np.all(np.isreal(mat)):
        mat = mat.real
    T = MobiusMap(*mat.ravel())
    image = T(source[3])
    scale = max(abs(complex(x)) for x in target)
    if abs(image - target[3]) > tol * max(1.0, scale):
        raise ValueError("the four points have different cross-ratios; no Möbius map exists")
    return T
