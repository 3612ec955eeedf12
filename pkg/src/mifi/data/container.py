"""Binary feature container.

Layout (all little-endian)::

    0   4 bytes  magic b"MIFI"
    4   1 byte   version (1)
    5   1 byte   ndim
    6   2 bytes  reserved, zero
    8   ndim x uint32 dims
    ..  prod(dims) x float32 payload, row-major
"""

from __future__ import annotations

import os
import struct

import numpy as np

from ..errors import FormatError, InvalidInputError

MAGIC = b"MIFI"
VERSION = 1
_PREFIX = struct.Struct("<4sBBH")
_MAX_ELEMENTS = 2**40


def encode_tensor(tensor) -> bytes:
    a = np.asarray(tensor)
    if a.ndim < 1 or a.ndim > 255:
        raise InvalidInputError(f"cannot store a rank-{a.ndim} tensor")
    if any(d < 1 or d > 0xFFFFFFFF for d in a.shape):
        raise InvalidInputError(f"dims {a.shape} must each be in [1, 2**32)")
    header = _PREFIX.pack(MAGIC, VERSION, a.ndim, 0) + struct.pack(f"<{a.ndim}I", *a.shape)
    return header + np.ascontiguousarray(a, dtype="<f4").tobytes()


def decode_tensor(buf: bytes) -> np.ndarray:
    if len(buf) < _PREFIX.size:
        raise FormatError("truncated header", len(buf))
    magic, version, ndim, reserved = _PREFIX.unpack_from(buf, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", 0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    if ndim == 0:
        raise FormatError("tensor rank must be at least 1", 5)
    if reserved != 0:
        raise FormatError("reserved bytes must be zero", 6)
    dims_end = _PREFIX.size + 4 * ndim
    if len(buf) < dims_end:
        raise FormatError("truncated dimension list", len(buf))
    dims = struct.unpack_from(f"<{ndim}I", buf, _PREFIX.size)
    count = 1
    for i, d in enumerate(dims):
        offset = _PREFIX.size + 4 * i
        if d == 0:
            raise FormatError(f"dimension {i} is zero", offset)
        count *= d
        if count > _MAX_ELEMENTS:
            raise FormatError(f"dimension product overflows the {_MAX_ELEMENTS}-element limit", offset)
    end = dims_end + 4 * count
    if len(buf) < end:
        raise FormatError(f"truncated payload: need {4 * count} bytes, have {len(buf) - dims_end}", len(buf))
    if len(buf) > end:
        raise FormatError(f"{len(buf) - end} trailing bytes after payload", end)
    return np.frombuffer(buf, dtype="<f4", count=count, offset=dims_end).astype(np.float32).reshape(dims)


def save_features(tensor, path) -> None:
    data = encode_tensor(tensor)
    with open(path, "wb") as fh:
        fh.write(data)


def load_features(path) -> np.ndarray:
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path, "rb") as fh:
        return decode_tensor(fh.read())
