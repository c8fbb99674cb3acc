"""Binary field files and CSV slice export.

FieldFile layout (all integers little-endian)::

    offset  size  content
    0       4     magic b"CCF1"
    4       4     version (u32, currently 1)
    8       1     kind (u8): 0 = real grid values, 1 = complex coefficients
    9       12    m, n, p (u32 each)
    21      ...   payload: float64 LE in (l, k, j) order, complex as re, im pairs
    end-4   4     CRC32 of the payload bytes (u32)
"""

from __future__ import annotations

import csv
import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import CylspecError
from .grid import CoeffTensor, GridField, GridSpec
from .transform import evaluate_at

__all__ = [
    "FieldFormatError",
    "MAGIC",
    "VERSION",
    "KIND_GRID",
    "KIND_COEFFS",
    "encode_field",
    "decode_field",
    "write_field",
    "read_field",
    "export_slice_csv",
]

MAGIC = b"CCF1"
VERSION = 1
KIND_GRID = 0
KIND_COEFFS = 1
_HEADER = struct.Struct("<4sIB3I")


class FieldFormatError(CylspecError, ValueError):
    """Malformed, truncated, corrupted or unsupported field file."""


def encode_field(data: GridField | CoeffTensor) -> bytes:
    """Serialise a real grid field or a coefficient tensor."""
    if not isinstance(data, (GridField, CoeffTensor)):
        raise TypeError(f"expected GridField or CoeffTensor, got {type(data).__name__}")
    spec = data.spec
    if isinstance(data, CoeffTensor):
        kind = KIND_COEFFS
        payload = np.ascontiguousarray(data.data, dtype="<c16").tobytes()
    elif isinstance(data, GridField):
        values = data.values
        if np.iscomplexobj(values):
            if np.any(values.imag != 0):
                raise ValueError("only real grid values can be stored; write the coefficients instead")
            values = values.real
        kind = KIND_GRID
        payload = np.ascontiguousarray(values, dtype="<f8").tobytes()
    header = _HEADER.pack(MAGIC, VERSION, kind, spec.m, spec.n, spec.p)
    return header + payload + struct.pack("<I", zlib.crc32(payload))


def decode_field(blob: bytes) -> GridField | CoeffTensor:
    if len(blob) < _HEADER.size + 4:
        raise FieldFormatError("file is truncated (header incomplete)")
    magic, version, kind, m, n, p = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FieldFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FieldFormatError(f"unsupported field file version {version} (expected {VERSION})")
    if kind not in (KIND_GRID, KIND_COEFFS):
        raise FieldFormatError(f"unknown field kind {kind}")
    count = m * n * p * (2 if kind == KIND_COEFFS else 1)
    expected = _HEADER.size + 8 * count + 4
    if len(blob) != expected:
        raise FieldFormatError(f"payload size mismatch: {len(blob)} bytes, expected {expected}")
    payload = blob[_HEADER.size : -4]
    (crc,) = struct.unpack("<I", blob[-4:])
    if zlib.crc32(payload) != crc:
        raise FieldFormatError("CRC mismatch")
    try:
        spec = GridSpec(m, n, p)
    except ValueError as exc:
        raise FieldFormatError(f"invalid grid sizes in header: {exc}") from exc
    if kind == KIND_COEFFS:
        data = np.frombuffer(payload, dtype="<c16").reshape(spec.shape)
        return CoeffTensor(spec, data.astype(np.complex128))
    data = np.frombuffer(payload, dtype="<f8").reshape(spec.shape)
    return GridField(spec, data.astype(np.float64))


def write_field(path, data: GridField | CoeffTensor) -> None:
    Path(path).write_bytes(encode_field(data))


def read_field(path) -> GridField | CoeffTensor:
    return decode_field(Path(path).read_bytes())


_PLANES = {"z": ("r", "theta"), "theta": ("r", "z"), "r": ("z", "theta")}


def export_slice_csv(coeffs: CoeffTensor, plane: str, value: float, path, resolution: int = 41) -> None:
    """Write ``(coord1, coord2, value)`` rows on a regular lattice of one plane.

    ``plane`` is ``"z"``, ``"theta"`` or ``"r"``, held at ``value``.  For a
    ``theta`` slice the radius covers ``[-1, 1]``, which is the diameter through
    angles ``theta`` and ``theta + pi``.  For ``z`` and ``r`` slices the radius
    runs over ``[0, 1]`` and the angle over ``[-pi, pi)``.  Values are real parts.
    """
    if plane not in _PLANES:
        raise ValueError(f"plane must be one of {sorted(_PLANES)}, got {plane!r}")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    value = float(value)
    if plane in ("z", "r") and not -1.0 <= value <= 1.0:
        raise ValueError(f"{plane} = {value} lies outside [-1, 1]")
    if plane == "r" and value < 0:
        raise ValueError("radial slices need r in [0, 1]")
    if plane == "theta" and not -np.pi <= value <= np.pi:
        raise ValueError(f"theta = {value} lies outside [-pi, pi]")
    angles = -np.pi + 2 * np.pi * np.arange(resolution) / resolution
    if plane == "z":
        a, b = np.meshgrid(np.linspace(0, 1, resolution), angles, indexing="ij")
        pts = (a, np.full_like(a, value), b)
    elif plane == "theta":
        a, b = np.meshgrid(np.linspace(-1, 1, resolution), np.linspace(-1, 1, resolution), indexing="ij")
        pts = (a, b, np.full_like(a, value))
    else:
        a, b = np.meshgrid(np.linspace(-1, 1, resolution), angles, indexing="ij")
        pts = (np.full_like(a, value), a, b)
    vals = np.real(evaluate_at(coeffs, pts))
    names = _PLANES[plane]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([names[0], names[1], "value"])
        for x, y, v in zip(a.ravel(), b.ravel(), vals.ravel()):
            writer.writerow([repr(float(x)), repr(float(y)), repr(float(v))])
