"""FTM1 tensor files: a tiny binary container for H x W x C float maps.

Layout, all little-endian:

* bytes 0-7   magic ``b"FTM1\\x00\\x00\\x00\\x00"``
* bytes 8-19  three uint32: h, w, c
* bytes 20+   ``h*w*c`` float32 values, row-major, channel-last

Write-then-read is bit-exact for float32 data.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

__all__ = ["MAGIC", "TensorFormatError", "write_ftm", "read_ftm"]

MAGIC = b"FTM1\x00\x00\x00\x00"
_HEADER = struct.Struct("<3I")


class TensorFormatError(ValueError):
    """Raised for bad magic, truncated payloads, or impossible headers."""


def write_ftm(path, tensor) -> None:
    """Write a real (H, W) or (H, W, C) tensor as float32 FTM1."""
    arr = np.asarray(tensor)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.size == 0:
        raise ValueError(f"expected a non-empty (H, W[, C]) tensor, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("tensor values must be finite")
    arr = np.ascontiguousarray(arr, dtype="<f4")
    h, w, c = arr.shape
    Path(path).write_bytes(MAGIC + _HEADER.pack(h, w, c) + arr.tobytes())


def read_ftm(path) -> np.ndarray:
    """Read an FTM1 file into an (H, W, C) float32 array."""
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) + _HEADER.size:
        raise TensorFormatError(f"{path}: file too short for an FTM1 header")
    if data[: len(MAGIC)] != MAGIC:
        raise TensorFormatError(f"{path}: bad magic {data[:8]!r}")
    h, w, c = _HEADER.unpack_from(data, len(MAGIC))
    if h < 1 or w < 1 or c < 1:
        raise TensorFormatError(f"{path}: invalid dimensions {(h, w, c)}")
    expected = len(MAGIC) + _HEADER.size + 4 * h * w * c
    if len(data) != expected:
        raise TensorFormatError(
            f"{path}: payload is {len(data)} bytes, expected {expected} for {(h, w, c)}"
        )
    arr = np.frombuffer(data, dtype="<f4", offset=len(MAGIC) + _HEADER.size)
    return arr.reshape(h, w, c).copy()
