"""Value <-> coefficient transforms on the CCF grid.

Coefficients are exact Chebyshev interpolation coefficients: a DCT-I with the
two endpoint samples (and the two end coefficients) weighted by 1/2, so that
``sum_j c_j T_j(x_i) = f_i`` at the Lobatto points.  The angular transform is a
plain DFT reordered so that slice ``l`` carries wavenumber ``l - p//2``.
Every step is an FFT, so both directions cost O(N log N).
"""

from __future__ import annotations

import numpy as np
import scipy.fft as sfft
from numpy.polynomial import chebyshev as cheb

from .grid import AXIS_R, AXIS_THETA, AXIS_Z, CoeffTensor, GridField, GridSpec

__all__ = [
    "CoeffTensor",
    "analyze",
    "synthesize",
    "evaluate_at",
    "cheb_analyze",
    "cheb_synthesize",
    "diff_r",
    "diff_z",
    "diff_theta",
]


def _sign_pattern(size: int, axis: int, ndim: int) -> np.ndarray:
    s = np.ones(size)
    s[1::2] = -1.0
    shape = [1] * ndim
    shape[axis] = size
    return s.reshape(shape)


def _ends(size: int, axis: int, ndim: int, value: float) -> np.ndarray:
    w = np.ones(size)
    w[0] = w[-1] = value
    shape = [1] * ndim
    shape[axis] = size
    return w.reshape(shape)


def cheb_analyze(values: np.ndarray, axis: int) -> np.ndarray:
    """Chebyshev coefficients of samples taken at increasing Lobatto points."""
    size = values.shape[axis]
    ndim = values.ndim
    # points run from -1 to 1, i.e. x_j = -cos(j pi/(size-1)), hence the (-1)^k
    c = sfft.dct(values, type=1, axis=axis) / (size - 1)
    return c * _ends(size, axis, ndim, 0.5) * _sign_pattern(size, axis, ndim)


def cheb_synthesize(coeffs: np.ndarray, axis: int) -> np.ndarray:
    """Inverse of :func:`cheb_analyze`."""
    size = coeffs.shape[axis]
    ndim = coeffs.ndim
    c = coeffs * _ends(size, axis, ndim, 2.0) * _sign_pattern(size, axis, ndim)
    return sfft.dct(c, type=1, axis=axis) / 2.0


def _theta_phase(spec: GridSpec) -> np.ndarray:
    # theta_l = -pi + 2 pi l / p contributes exp(-i w pi) = (-1)^w
    w = spec.wavenumbers()
    return np.where(w % 2 == 0, 1.0, -1.0)[:, None, None]


def analyze(field: GridField) -> CoeffTensor:
    """Coefficients of the CCF interpolant of ``field``."""
    spec = field.spec
    v = field.values
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot analyze non-finite values")
    c = cheb_analyze(v, AXIS_R)
    c = cheb_analyze(c, AXIS_Z)
    c = sfft.fftshift(sfft.fft(c, axis=AXIS_THETA), axes=AXIS_THETA) / spec.p
    return CoeffTensor(spec, c * _theta_phase(spec))


def synthesize(coeffs: CoeffTensor, real: bool = False) -> GridField:
    """Grid values of the CCF polynomial with coefficients ``coeffs``.

    With ``real=True`` the imaginary part (round-off for Hermitian input) is dropped.
    """
    spec = coeffs.spec
    c = coeffs.data * _theta_phase(spec)
    v = sfft.ifft(sfft.ifftshift(c, axes=AXIS_THETA), axis=AXIS_THETA) * spec.p
    v = cheb_synthesize(v, AXIS_Z)
    v = cheb_synthesize(v, AXIS_R)
    return GridField(spec, v.real if real else v)


def evaluate_at(coeffs: CoeffTensor, point) -> complex | np.ndarray:
    """Evaluate the CCF polynomial at ``point = (r, z, theta)``.

    The three entries may be arrays of a common shape; Clenshaw recurrences
    are used in ``r`` and ``z``.
    """
    r, z, theta = (np.asarray(x, dtype=float) for x in point)
    r, z, theta = np.broadcast_arrays(r, z, theta)
    spec = coeffs.spec
    w = spec.wavenumbers()
    # (p, n, m) -> (m, p, n) so that chebval sums over the leading axis
    c = np.moveaxis(coeffs.data, AXIS_R, 0)
    flat_r, flat_z, flat_t = r.ravel(), z.ravel(), theta.ravel()
    out = np.empty(flat_r.shape, dtype=complex)
    for i, (ri, zi, ti) in enumerate(zip(flat_r, flat_z, flat_t)):
        in_r = cheb.chebval(ri, c)  # (p, n)
        in_z = cheb.chebval(zi, in_r.T)  # (p,)
        out[i] = np.dot(in_z, np.exp(1j * w * ti))
    if r.ndim == 0:
        return complex(out[0])
    return out.reshape(r.shape)


def _cheb_derivative(data: np.ndarray, axis: int, order: int) -> np.ndarray:
    d = cheb.chebder(data, m=order, axis=axis)
    pad = [(0, 0)] * data.ndim
    pad[axis] = (0, order)
    return np.pad(d, pad)


def diff_r(coeffs: CoeffTensor, order: int = 1) -> CoeffTensor:
    """Exact ``d^order/dr^order`` in coefficient space."""
    return CoeffTensor(coeffs.spec, _cheb_derivative(coeffs.data, AXIS_R, order))


def diff_z(coeffs: CoeffTensor, order: int = 1) -> CoeffTensor:
    """Exact ``d^order/dz^order`` in coefficient space."""
    return CoeffTensor(coeffs.spec, _cheb_derivative(coeffs.data, AXIS_Z, order))


def diff_theta(coeffs: CoeffTensor, order: int = 1) -> CoeffTensor:
    """``d^order/dtheta^order``; the unpaired Nyquist mode is dropped for odd orders."""
    spec = coeffs.spec
    w = spec.wavenumbers().astype(float)
    factor = (1j * w) ** order
    if order % 2 == 1 and spec.p % 2 == 0:
        factor[0] = 0.0
    return CoeffTensor(spec, coeffs.data * factor[:, None, None])
