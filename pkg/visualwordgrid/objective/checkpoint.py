"""VWGM checkpoint files.

Layout: magic ``VWGM`` | version u32 | header length u32 | UTF-8 JSON header |
tensor count u32 | per tensor: name length u16, UTF-8 name, rank u8,
rank x dim u32, f32 payload. All integers and floats are little-endian.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..corpus.types import FieldSchema
from ..embed import EmbedderConfig
from ..exceptions import BadMagicError, IoFailureError, MalformedFileError, VersionMismatchError
from ..grid.spec import GridSpec
from ..grid.tensor_io import encode_shape
from ..net import ArchConfig, ParamSet, check_params

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"VWGM"
CHECKPOINT_VERSION = 1


@dataclass
class Checkpoint:
    arch: ArchConfig
    schema: FieldSchema
    spec: GridSpec
    embedder: EmbedderConfig
    params: ParamSet
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def encoder_kind(self) -> str:
        return str(self.metadata.get("encoder_kind", ""))

    def header(self) -> dict[str, Any]:
        return {
            "arch": self.arch.to_json(),
            "schema": self.schema.to_json(),
            "grid": self.spec.to_json(),
            "embedder": self.embedder.to_json(),
            "metadata": self.metadata,
        }


def _encode_tensor(name: str, tensor: np.ndarray) -> bytes:
    raw_name = name.encode("utf-8")
    payload = np.ascontiguousarray(tensor, dtype="<f4").tobytes()
    return struct.pack("<H", len(raw_name)) + raw_name + encode_shape(tensor.shape) + payload


def save_checkpoint(path: Path, checkpoint: Checkpoint) -> None:
    check_params(checkpoint.params, checkpoint.arch)
    header = json.dumps(checkpoint.header(), sort_keys=True).encode("utf-8")
    chunks = [
        CHECKPOINT_MAGIC,
        struct.pack("<II", CHECKPOINT_VERSION, len(header)),
        header,
        struct.pack("<I", len(checkpoint.params)),
    ]
    chunks.extend(_encode_tensor(name, tensor) for name, tensor in checkpoint.params.items())
    try:
        Path(path).write_bytes(b"".join(chunks))
    except OSError as exc:
        raise IoFailureError(f"Unable to write checkpoint {path}: {exc}") from exc
    logger.info("Saved checkpoint %s (%d tensors)", path, len(checkpoint.params))


class _Reader:
    def __init__(self, data: bytes, path: Path):
        self._data = data
        self._offset = 0
        self._path = path

    def take(self, count: int) -> bytes:
        end = self._offset + count
        if end > len(self._data):
            raise IoFailureError(f"{self._path} is truncated")
        chunk = self._data[self._offset : end]
        self._offset = end
        return chunk

    def unpack(self, fmt: str) -> tuple[Any, ...]:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    @property
    def exhausted(self) -> bool:
        return self._offset == len(self._data)


def load_checkpoint(path: Path) -> Checkpoint:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailureError(f"Unable to read checkpoint {path}: {exc}") from exc
    reader = _Reader(data, path)
    if reader.take(4) != CHECKPOINT_MAGIC:
        raise BadMagicError(f"{path} is not a VWGM checkpoint")
    (version,) = reader.unpack("<I")
    if version != CHECKPOINT_VERSION:
        raise VersionMismatchError(f"{path} has format version {version}, expected {CHECKPOINT_VERSION}")
    (header_length,) = reader.unpack("<I")
    try:
        header = json.loads(reader.take(header_length).decode("utf-8"))
        arch = ArchConfig.from_json(header["arch"])
        spec = GridSpec.from_json(header["grid"])
        embedder = EmbedderConfig.from_json(header["embedder"])
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise MalformedFileError(f"{path} has an invalid header: {exc}") from exc
    schema = FieldSchema.from_json(header.get("schema"))

    (count,) = reader.unpack("<I")
    params: ParamSet = {}
    for _ in range(count):
        (name_length,) = reader.unpack("<H")
        name = reader.take(name_length).decode("utf-8", errors="replace")
        (rank,) = reader.unpack("<B")
        shape = reader.unpack(f"<{rank}I")
        size = int(np.prod(shape, dtype=np.int64))
        params[name] = np.frombuffer(reader.take(4 * size), dtype="<f4").astype(np.float32).reshape(shape)
    if not reader.exhausted:
        raise MalformedFileError(f"{path} has trailing bytes after the last tensor")
    check_params(params, arch)
    logger.info("Loaded checkpoint %s (%s, %d tensors)", path, arch.variant, len(params))
    return Checkpoint(
        arch=arch,
        schema=schema,
        spec=spec,
        embedder=embedder,
        params=params,
        metadata=dict(header.get("metadata") or {}),
    )
