"""VWGT binary tensor files.

Layout: magic ``VWGT`` | dtype u8 (0 = f32) | rank u8 | rank x dim u32 LE |
payload f32 LE row-major. Label masks are stored as f32 holding integers.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..exceptions import BadMagicError, IoFailureError, ShapeOverflowError

TENSOR_MAGIC = b"VWGT"
DTYPE_F32 = 0
MAX_DIM = 0xFFFFFFFF
MAX_RANK = 0xFF


def encode_shape(shape: tuple[int, ...]) -> bytes:
    if len(shape) > MAX_RANK:
        raise ShapeOverflowError(f"Rank {len(shape)} exceeds {MAX_RANK}")
    for dim in shape:
        if dim < 1 or dim > MAX_DIM:
            raise ShapeOverflowError(f"Dimension {dim} of shape {shape} is outside 1..{MAX_DIM}")
    return struct.pack(f"<B{len(shape)}I", len(shape), *shape)


def write_tensor(path: Path, tensor: np.ndarray) -> None:
    """Write ``tensor`` as little-endian float32; zero-length dimensions are rejected."""

    array = np.asarray(tensor)
    header = TENSOR_MAGIC + struct.pack("<B", DTYPE_F32) + encode_shape(array.shape)
    payload = np.ascontiguousarray(array, dtype="<f4").tobytes()
    try:
        Path(path).write_bytes(header + payload)
    except OSError as exc:
        raise IoFailureError(f"Unable to write tensor {path}: {exc}") from exc


def read_tensor(path: Path) -> np.ndarray:
    """Read a VWGT file into a native-endian float32 array."""

    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailureError(f"Unable to read tensor {path}: {exc}") from exc
    if data[:4] != TENSOR_MAGIC:
        raise BadMagicError(f"{path} is not a VWGT tensor file")
    if len(data) < 6:
        raise IoFailureError(f"{path} is truncated")
    dtype, rank = data[4], data[5]
    if dtype != DTYPE_F32:
        raise IoFailureError(f"{path} has unsupported dtype code {dtype}")
    offset = 6 + 4 * rank
    if len(data) < offset:
        raise IoFailureError(f"{path} is truncated")
    shape = struct.unpack_from(f"<{rank}I", data, 6)
    count = int(np.prod(shape, dtype=np.int64))
    if len(data) != offset + 4 * count:
        raise IoFailureError(f"{path} payload has {len(data) - offset} bytes, expected {4 * count}")
    return np.frombuffer(data, dtype="<f4", count=count, offset=offset).astype(np.float32).reshape(shape)
