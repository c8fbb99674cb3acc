"""Banded ultraspherical operators and the modal Sylvester quadruples.

Chebyshev coefficients (the ``T`` basis) are mapped into the ``C^(1) = U`` and
``C^(2)`` Gegenbauer bases so that differentiation becomes a shift:

* ``C01``: ``T -> U``, ``C12``: ``U -> C^(2)``, ``C02 = C12 @ C01``;
* ``D1``: ``T -> U`` first derivative, ``D2``: ``T -> C^(2)`` second derivative;
* ``R``: multiplication by ``x`` inside the ``C^(2)`` basis, ``R2 = R @ R @ C02``.

All matrices are square and truncated at the requested size, which is the
usual convention: the last rows of ``D1``/``D2`` (the ones that lose
information) are the rows the boundary treatment in :mod:`cylspec.solvers`
discards.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "BandedMatrix",
    "ModalOperator",
    "build_conversion_01",
    "build_conversion_12",
    "build_conversion_02",
    "build_multiplication_r",
    "build_r2",
    "build_derivative_1",
    "build_derivative_2",
    "build_modal_laplacian",
    "assemble_modal_helmholtz",
    "assemble_modal_poisson",
]


class BandedMatrix:
    """A real matrix stored as a map ``offset -> diagonal``.

    Offsets follow :func:`numpy.diag`: ``0`` is the main diagonal, positive
    offsets lie above it.  Diagonal ``d`` at offset ``o`` has length equal to
    ``len(np.diag(np.zeros((rows, cols)), o))``.  Instances are treated as
    immutable once built; the CSR form is cached on first use.
    """

    __slots__ = ("rows", "cols", "bands", "_csr")

    def __init__(self, rows: int, cols: int, bands: dict[int, np.ndarray] | None = None):
        if rows < 1 or cols < 1:
            raise ValueError("matrix dimensions must be positive")
        self.rows = int(rows)
        self.cols = int(cols)
        self.bands: dict[int, np.ndarray] = {}
        self._csr = None
        for off, diag in (bands or {}).items():
            off = int(off)
            if not -rows < off < cols:
                raise ValueError(f"offset {off} outside a {rows}x{cols} matrix")
            diag = np.asarray(diag, dtype=float)
            expected = _diag_len(rows, cols, off)
            if diag.shape != (expected,):
                raise ValueError(f"diagonal {off} needs {expected} entries, got {diag.shape}")
            if not np.all(np.isfinite(diag)):
                raise ValueError("banded entries must be finite")
            if np.any(diag != 0):
                self.bands[off] = diag.copy()

    # construction helpers -------------------------------------------------
    @classmethod
    def from_dense(cls, a, tol: float = 0.0) -> "BandedMatrix":
        a = np.asarray(a, dtype=float)
        rows, cols = a.shape
        bands = {}
        for off in range(-rows + 1, cols):
            d = np.diag(a, off).copy()
            d[np.abs(d) <= tol] = 0.0
            if np.any(d):
                bands[off] = d
        return cls(rows, cols, bands)

    @classmethod
    def from_sparse(cls, s) -> "BandedMatrix":
        s = sp.coo_array(s)
        s.sum_duplicates()
        rows, cols = s.shape
        offs = s.col.astype(np.int64) - s.row.astype(np.int64)
        pos = np.minimum(s.row, s.col)
        bands: dict[int, np.ndarray] = {}
        for off in np.unique(offs):
            sel = offs == off
            d = np.zeros(_diag_len(rows, cols, int(off)))
            d[pos[sel]] = s.data[sel]
            bands[int(off)] = d
        return cls(rows, cols, bands)

    @classmethod
    def block_diag(cls, blocks) -> "BandedMatrix":
        """Block-diagonal stack; the bandwidth is that of the widest block."""
        return cls.from_sparse(sp.block_diag([b.tocsr() for b in blocks], format="coo"))

    @classmethod
    def identity(cls, n: int) -> "BandedMatrix":
        return cls(n, n, {0: np.ones(n)})

    # views ------------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def lower(self) -> int:
        """Number of nonzero sub-diagonals."""
        return max([-o for o in self.bands if o < 0], default=0)

    @property
    def upper(self) -> int:
        """Number of nonzero super-diagonals."""
        return max([o for o in self.bands if o > 0], default=0)

    @property
    def bandwidth(self) -> int:
        return max(self.lower, self.upper)

    def entry(self, i: int, j: int) -> float:
        d = self.bands.get(j - i)
        return 0.0 if d is None else float(d[min(i, j)])

    def toarray(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols))
        for off, d in self.bands.items():
            i0, j0 = max(0, -off), max(0, off)
            idx = np.arange(len(d))
            out[i0 + idx, j0 + idx] = d
        return out

    def tocsr(self) -> sp.csr_array:
        if self._csr is None:
            self._csr = self._build_csr()
        return self._csr

    def _build_csr(self) -> sp.csr_array:
        if not self.bands:
            return sp.csr_array((self.rows, self.cols))
        offs = sorted(self.bands)
        full = []
        for off in offs:
            # dia storage indexes diagonals by column
            row = np.zeros(self.cols)
            d = self.bands[off]
            j0 = max(0, off)
            row[j0 : j0 + len(d)] = d
            full.append(row)
        return sp.dia_array((np.array(full), offs), shape=self.shape).tocsr()

    @property
    def T(self) -> "BandedMatrix":
        return BandedMatrix(self.cols, self.rows, {-o: d for o, d in self.bands.items()})

    def to_lapack(self, kl: int | None = None, ku: int | None = None) -> np.ndarray:
        """LAPACK ``gbtrf`` storage with ``kl`` extra rows reserved for fill-in."""
        if self.rows != self.cols:
            raise ValueError("banded LU needs a square matrix")
        kl = self.lower if kl is None else kl
        ku = self.upper if ku is None else ku
        n = self.rows
        ab = np.zeros((2 * kl + ku + 1, n))
        for off, d in self.bands.items():
            if off < -kl or off > ku:
                raise ValueError("band larger than the requested storage")
            j0 = max(0, off)
            ab[kl + ku - off, j0 : j0 + len(d)] = d
        return ab

    # algebra ----------------------------------------------------------------
    def __matmul__(self, other):
        if isinstance(other, BandedMatrix):
            if self.cols != other.rows:
                raise ValueError("size mismatch")
            return BandedMatrix.from_sparse(self.tocsr() @ other.tocsr())
        return self.tocsr() @ other

    def __rmatmul__(self, other):
        return (self.tocsr().T @ np.asarray(other).T).T

    def _combine(self, other: "BandedMatrix", sign: float) -> "BandedMatrix":
        if self.shape != other.shape:
            raise ValueError("size mismatch")
        bands = {o: d.copy() for o, d in self.bands.items()}
        for o, d in other.bands.items():
            bands[o] = bands[o] + sign * d if o in bands else sign * d
        return BandedMatrix(self.rows, self.cols, bands)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, scalar):
        return BandedMatrix(self.rows, self.cols, {o: scalar * d for o, d in self.bands.items()})

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __eq__(self, other):
        return (
            isinstance(other, BandedMatrix)
            and self.shape == other.shape
            and self.bands.keys() == other.bands.keys()
            and all(np.array_equal(d, other.bands[o]) for o, d in self.bands.items())
        )

    __hash__ = None

    def __repr__(self):
        return f"BandedMatrix({self.rows}x{self.cols}, offsets={sorted(self.bands)})"


def _diag_len(rows: int, cols: int, off: int) -> int:
    return max(0, min(rows + min(off, 0), cols - max(off, 0)))


def _check_size(n: int, least: int) -> None:
    if n < least:
        raise ValueError(f"operator size must be at least {least}, got {n}")


@functools.lru_cache(maxsize=None)
def build_conversion_01(n: int) -> BandedMatrix:
    """``T -> U``: ``T_0 = U_0``, ``T_1 = U_1/2``, ``T_k = (U_k - U_{k-2})/2``."""
    _check_size(n, 2)
    main = np.full(n, 0.5)
    main[0] = 1.0
    return BandedMatrix(n, n, {0: main, 2: np.full(n - 2, -0.5)})


@functools.lru_cache(maxsize=None)
def build_conversion_12(n: int) -> BandedMatrix:
    """``U -> C^(2)``: ``U_k = (C2_k - C2_{k-2}) / (k + 1)``."""
    _check_size(n, 2)
    k = np.arange(n, dtype=float)
    return BandedMatrix(n, n, {0: 1.0 / (k + 1), 2: -1.0 / (k[2:] + 1)})


@functools.lru_cache(maxsize=None)
def build_conversion_02(n: int) -> BandedMatrix:
    """``T -> C^(2)``."""
    return build_conversion_12(n) @ build_conversion_01(n)


@functools.lru_cache(maxsize=None)
def build_multiplication_r(n: int) -> BandedMatrix:
    """Multiplication by ``x`` in the ``C^(2)`` basis (three-term recurrence)."""
    _check_size(n, 2)
    k = np.arange(n - 1, dtype=float)
    sub = (k + 1) / (2 * (k + 2))  # entry (k+1, k)
    sup = (k + 4) / (2 * (k + 3))  # entry (k, k+1), i.e. (c+3)/(2(c+2)) at column c
    return BandedMatrix(n, n, {-1: sub, 1: sup})


@functools.lru_cache(maxsize=None)
def build_r2(n: int) -> BandedMatrix:
    """``R @ R @ C02``: multiplication by ``x**2`` from ``T`` into ``C^(2)``."""
    r = build_multiplication_r(n)
    return r @ r @ build_conversion_02(n)


@functools.lru_cache(maxsize=None)
def build_derivative_1(n: int) -> BandedMatrix:
    """``d/dx T_k = k U_{k-1}``."""
    _check_size(n, 3)
    return BandedMatrix(n, n, {1: np.arange(1, n, dtype=float)})


@functools.lru_cache(maxsize=None)
def build_derivative_2(n: int) -> BandedMatrix:
    """``d^2/dx^2 T_k = 2k C2_{k-2}``."""
    _check_size(n, 3)
    return BandedMatrix(n, n, {2: 2.0 * np.arange(2, n, dtype=float)})


@functools.lru_cache(maxsize=None)
def build_modal_laplacian(m: int, wavenumber: int) -> BandedMatrix:
    """``r^2 (d_rr + r^-1 d_r - w^2 r^-2)`` from ``T`` into ``C^(2)``.

    This is ``R C12 D1 + R^2 D2 - w^2 C02``: the horizontal Laplacian of a
    single Fourier mode, multiplied through by ``r^2`` so that it stays polynomial.
    """
    r = build_multiplication_r(m)
    lap = r @ build_conversion_12(m) @ build_derivative_1(m)
    lap = lap + r @ r @ build_derivative_2(m)
    if wavenumber:
        lap = lap - float(wavenumber) ** 2 * build_conversion_02(m)
    return lap


@dataclass(frozen=True)
class ModalOperator:
    """Sylvester quadruple for ``A X B + C X D = F`` acting on one Fourier slice.

    ``B`` and ``D`` are stored already transposed, i.e. as they multiply ``X``
    from the right.
    """

    A: BandedMatrix
    B: BandedMatrix
    C: BandedMatrix
    D: BandedMatrix
    wavenumber: int
    scale: float

    def apply(self, X: np.ndarray) -> np.ndarray:
        """``A X B + C X D`` for a dense ``m x n`` matrix ``X``."""
        left = self.A @ X
        right = self.C @ X
        return (self.B.T @ left.T).T + (self.D.T @ right.T).T

    @property
    def shape(self) -> tuple[int, int]:
        return (self.A.rows, self.B.rows)


def _spec_sizes(spec) -> tuple[int, int]:
    m, n = int(spec.m), int(spec.n)
    if m < 3 or n < 3:
        raise ValueError("operators need at least three coefficients per direction")
    return m, n


@functools.lru_cache(maxsize=256)
def _helmholtz(m: int, n: int, wavenumber: int, scale: float) -> ModalOperator:
    r2 = build_r2(m)
    A = r2 - scale * build_modal_laplacian(m, wavenumber) if scale else r2
    B = build_conversion_02(n).T
    C = -scale * r2 if scale else BandedMatrix(m, m)
    D = build_derivative_2(n).T
    return ModalOperator(A, B, C, D, wavenumber, scale)


def assemble_modal_helmholtz(spec, wavenumber: int, scale: float) -> ModalOperator:
    """``r^2 (1 - scale * Laplacian)`` for Fourier mode ``wavenumber``.

    ``A = R2 - scale*L_r``, ``B = C02^T``, ``C = -scale*R2``, ``D = D2^T``.  With
    ``scale = 0`` the pair reduces to the mass operator ``(R2, C02^T)``.
    """
    m, n = _spec_sizes(spec)
    scale = float(scale)
    if not np.isfinite(scale):
        raise ValueError("scale must be finite")
    return _helmholtz(m, n, int(wavenumber), scale)


@functools.lru_cache(maxsize=256)
def _poisson(m: int, n: int, wavenumber: int) -> ModalOperator:
    return ModalOperator(
        build_modal_laplacian(m, wavenumber),
        build_conversion_02(n).T,
        build_r2(m),
        build_derivative_2(n).T,
        wavenumber,
        1.0,
    )


def assemble_modal_poisson(spec, wavenumber: int) -> ModalOperator:
    """``r^2 Laplacian`` for one Fourier mode.

    ``A = L_r``, ``B = C02^T``, ``C = R2``, ``D = D2^T``; the matching right-hand
    side of ``Laplacian u = f`` is ``R2 @ F @ C02^T``.
    """
    m, n = _spec_sizes(spec)
    return _poisson(m, n, int(wavenumber))
