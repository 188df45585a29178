"""OBM1 binary matrix file format.

Layout: magic bytes ``OBM1``, one u8 dtype code (1 = float64, 2 = signed one-bit
stored as int8 +/-1), u64 row count, u64 column count, then the payload
row-major little-endian.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .signal_model import SignedMatrix

MAGIC = b"OBM1"
DTYPE_F64 = 1
DTYPE_I8 = 2
_HEADER = struct.Struct("<4sBQQ")


class Obm1FormatError(ValueError):
    """Raised for bad magic bytes, dtype codes, or truncated payloads."""


def write_obm1(path, matrix) -> None:
    """Write a matrix; SignedMatrix goes out as int8 (+/-1), anything else as float64."""
    if isinstance(matrix, SignedMatrix):
        arr = matrix.data.astype("<i1")
        code = DTYPE_I8
    else:
        arr = np.atleast_2d(np.asarray(matrix, dtype="<f8"))
        code = DTYPE_F64
    if arr.ndim != 2:
        raise ValueError("OBM1 stores two-dimensional matrices")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, code, arr.shape[0], arr.shape[1]))
        fh.write(np.ascontiguousarray(arr).tobytes(order="C"))


def read_obm1(path):
    """Read a matrix; returns a float64 ndarray (code 1) or SignedMatrix (code 2)."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise Obm1FormatError("file too short for an OBM1 header")
    magic, code, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise Obm1FormatError(f"bad magic bytes {magic!r}, expected {MAGIC!r}")
    if code == DTYPE_F64:
        dt, size = np.dtype("<f8"), 8
    elif code == DTYPE_I8:
        dt, size = np.dtype("<i1"), 1
    else:
        raise Obm1FormatError(f"unknown dtype code {code}")
    need = _HEADER.size + rows * cols * size
    if len(raw) != need:
        raise Obm1FormatError(f"payload length {len(raw) - _HEADER.size} does not match "
                              f"{rows}x{cols} of dtype code {code}")
    arr = np.frombuffer(raw, dtype=dt, count=rows * cols, offset=_HEADER.size)
    arr = arr.reshape(rows, cols)
    if code == DTYPE_I8:
        return SignedMatrix(arr.astype(float))
    return arr.astype(float)
