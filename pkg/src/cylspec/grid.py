"""Doubled Chebyshev--Chebyshev--Fourier grid and field containers.

The cylinder ``-1 <= r <= 1, -1 <= z <= 1, -pi <= theta < pi`` is sampled with
Chebyshev--Lobatto points in the signed radius ``r`` and in ``z`` and with
equispaced points in ``theta``.  A physical point ``(r, theta)`` therefore shows
up twice, as ``(r, theta)`` and ``(-r, theta + pi)``.

Array layout
------------
Both :class:`GridField` and :class:`CoeffTensor` hold a 3-d array of shape
``(p, n, m)``, i.e. axis 0 is the Fourier index ``l``, axis 1 the vertical index
``k`` and axis 2 the radial index ``j``.  Flattened in C order this is the
``(l, k, j)`` ordering with ``j`` fastest, and ``data[l].T`` is the ``m x n``
coefficient matrix ``X_l`` used by the modal solvers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

AXIS_THETA, AXIS_Z, AXIS_R = 0, 1, 2


@dataclass(frozen=True)
class GridSpec:
    """Discretization sizes: ``m`` radial, ``n`` vertical, ``p`` angular points."""

    m: int
    n: int
    p: int

    def __post_init__(self):
        for name in ("m", "n", "p"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise TypeError(f"{name} must be an integer, got {value!r}")
        if self.m < 4 or self.n < 4:
            raise ValueError(f"need m >= 4 and n >= 4, got m={self.m}, n={self.n}")
        if self.p < 2:
            raise ValueError(f"need p >= 2, got p={self.p}")

    @property
    def N(self) -> int:
        return self.m * self.n * self.p

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.p, self.n, self.m)

    @property
    def doubled(self) -> bool:
        """True when ``theta + pi`` is a grid angle, so the doubling can be checked."""
        return self.p % 2 == 0

    def wavenumbers(self) -> np.ndarray:
        """Fourier wavenumber ``l - p//2`` carried by each slice ``l``."""
        return np.arange(self.p) - self.p // 2


def chebyshev_points(m: int) -> np.ndarray:
    """Chebyshev--Lobatto points in increasing order, ``cos((m-j-1) pi / (m-1))``."""
    if m < 2:
        raise ValueError("need at least two Chebyshev points")
    j = np.arange(m)
    x = np.cos((m - j - 1) * np.pi / (m - 1))
    # cos is not exactly antisymmetric in floating point; snap the obvious values
    x[0], x[-1] = -1.0, 1.0
    if m % 2 == 1:
        x[m // 2] = 0.0
    return x


def fourier_points(p: int) -> np.ndarray:
    """Equispaced angles ``(2l - p) pi / p`` covering ``[-pi, pi)``."""
    if p < 1:
        raise ValueError("need at least one angle")
    return (2 * np.arange(p) - p) * np.pi / p


def grid_axes(spec: GridSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The one-dimensional ``(r, z, theta)`` point sets of ``spec``."""
    return chebyshev_points(spec.m), chebyshev_points(spec.n), fourier_points(spec.p)


def grid_mesh(spec: GridSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Broadcast ``(r, z, theta)`` arrays, each of shape ``spec.shape``."""
    r, z, theta = grid_axes(spec)
    T, Z, R = np.meshgrid(theta, z, r, indexing="ij")
    return R, Z, T


def grid_points(spec: GridSpec) -> np.ndarray:
    """All grid points as an ``(N, 3)`` array of ``(r, z, theta)`` rows.

    Rows follow the field layout: ``l`` outermost, then ``k``, then ``j``.
    """
    R, Z, T = grid_mesh(spec)
    return np.stack([R.ravel(), Z.ravel(), T.ravel()], axis=1)


class _Field:
    __slots__ = ("spec", "_data")

    def __init__(self, spec: GridSpec, data, dtype):
        arr = np.array(data, dtype=dtype, copy=True)
        if arr.ndim == 1 and arr.size == spec.N:
            arr = arr.reshape(spec.shape)
        if arr.shape != spec.shape:
            raise ValueError(f"expected shape {spec.shape}, got {arr.shape}")
        arr.setflags(write=False)
        self.spec = spec
        self._data = arr

    @property
    def data(self) -> np.ndarray:
        return self._data

    def __array__(self, dtype=None, copy=None):
        return self._data if dtype is None else self._data.astype(dtype)

    def __eq__(self, other):
        return (
            type(other) is type(self)
            and other.spec == self.spec
            and np.array_equal(other._data, self._data)
        )

    __hash__ = None

    def _wrap(self, data):
        return type(self)(self.spec, data)

    def __add__(self, other):
        return self._wrap(self._data + _raw(other, self.spec))

    def __sub__(self, other):
        return self._wrap(self._data - _raw(other, self.spec))

    def __mul__(self, scalar):
        return self._wrap(self._data * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self._data)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self._data)))


def _raw(other, spec):
    if isinstance(other, _Field):
        if other.spec != spec:
            raise ValueError("grid mismatch")
        return other.data
    return other


class GridField(_Field):
    """Point values on the doubled grid, stored with shape ``(p, n, m)``."""

    __slots__ = ()

    def __init__(self, spec: GridSpec, values):
        values = np.asarray(values)
        dtype = np.complex128 if np.iscomplexobj(values) else np.float64
        super().__init__(spec, values, dtype)
        if not np.all(np.isfinite(self._data)):
            raise ValueError("field values must be finite")

    @property
    def values(self) -> np.ndarray:
        return self._data

    @classmethod
    def from_function(cls, spec: GridSpec, f) -> "GridField":
        """Sample ``f(r, z, theta)`` (vectorised) on the grid."""
        R, Z, T = grid_mesh(spec)
        return cls(spec, np.broadcast_to(f(R, Z, T), spec.shape))

    def __repr__(self):
        return f"GridField({self.spec}, dtype={self._data.dtype})"


class CoeffTensor(_Field):
    """CCF coefficients: ``data[l, k, j]`` multiplies ``T_j(r) T_k(z) exp(i (l - p//2) theta)``."""

    __slots__ = ()

    def __init__(self, spec: GridSpec, data):
        super().__init__(spec, data, np.complex128)

    @classmethod
    def zeros(cls, spec: GridSpec) -> "CoeffTensor":
        return cls(spec, np.zeros(spec.shape, dtype=complex))

    @classmethod
    def from_slices(cls, spec: GridSpec, slices) -> "CoeffTensor":
        """Build from ``p`` matrices ``X_l`` of shape ``(m, n)``."""
        stack = np.asarray(slices)
        return cls(spec, np.swapaxes(stack, 1, 2))

    def slice(self, l: int) -> np.ndarray:
        """The ``m x n`` matrix ``X_l`` (rows: radial degree, columns: vertical degree)."""
        return self._data[l].T

    def slices(self) -> np.ndarray:
        """All modal matrices stacked, shape ``(p, m, n)``."""
        return np.swapaxes(self._data, 1, 2)

    def is_hermitian(self, tol: float = 1e-14) -> bool:
        """Conjugate pairing of slices ``l`` and ``2*(p//2) - l`` (real-field test)."""
        p = self.spec.p
        h = p // 2
        lo = max(0, 2 * h - (p - 1))
        idx = np.arange(lo, p)
        partner = 2 * h - idx
        diff = self._data[idx] - np.conj(self._data[partner])
        return float(np.max(np.abs(diff), initial=0.0)) <= tol * max(1.0, self.max_abs())

    def __repr__(self):
        return f"CoeffTensor({self.spec})"


def parity_mask(spec: GridSpec, vector_component: bool = False) -> np.ndarray:
    """Boolean mask (shape ``spec.shape``) of the coefficients kept by parity projection.

    Scalars keep ``(j, l)`` with ``j + (l - p//2)`` even.  The ``r`` and ``theta``
    components of a vector field flip sign under ``(r, theta) -> (-r, theta + pi)``
    and keep the odd combinations instead.
    """
    w = spec.wavenumbers()
    j = np.arange(spec.m)
    odd = (j[None, :] + w[:, None]) % 2 == 1
    keep = odd if vector_component else ~odd
    return np.broadcast_to(keep[:, None, :], spec.shape)


def parity_project(coeffs: CoeffTensor, vector_component: bool = False) -> CoeffTensor:
    """Zero every coefficient whose radial parity does not match its wavenumber parity."""
    mask = parity_mask(coeffs.spec, vector_component)
    return CoeffTensor(coeffs.spec, np.where(mask, coeffs.data, 0.0))


def doubling_defect(field: GridField, sign: float = 1.0) -> float:
    """``max |f(j,k,l) - sign * f(m-1-j, k, (l + p/2) mod p)|`` over the grid."""
    spec = field.spec
    if not spec.doubled:
        raise ValueError("the doubling identification needs an even number of angles")
    v = field.values
    partner = np.roll(v, -(spec.p // 2), axis=AXIS_THETA)[:, :, ::-1]
    return float(np.max(np.abs(v - sign * partner)))


def check_physical_consistency(field: GridField, tol: float) -> bool:
    """Whether ``field`` takes equal values at the two copies of every physical point."""
    return doubling_defect(field) <= tol
