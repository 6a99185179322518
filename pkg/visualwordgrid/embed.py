"""Word embeddings: hashed character n-grams with an optional pretrained overlay.

A token is wrapped as ``<token>``, cut into character n-grams, and each n-gram
is hashed (FNV-1a 64) into one of ``bucket_count`` buckets. Every bucket owns a
pseudo-random vector derived from the embedder seed; the token embedding is
the L2-normalised sum of its bucket vectors. Misspelled tokens share most of
their n-grams with the correct spelling and so stay close in cosine terms.
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

from .exceptions import DimensionMismatchError, IoFailureError, MalformedLineError
from .rng import STREAM_BUCKET, Xoshiro256, derive_seed, fnv1a_64

logger = logging.getLogger(__name__)

MODE_HASHED = "hashed"
MODE_TABLE = "table_with_hashed_fallback"


def normalize_token(text: str) -> str:
    """Trim surrounding whitespace and lowercase; punctuation and digits are kept."""

    return text.strip().lower()


def char_ngrams(token: str, min_n: int, max_n: int) -> list[str]:
    """Character n-grams of ``<token>`` for every ``n`` in ``[min_n, max_n]``."""

    wrapped = f"<{token}>"
    grams = []
    for n in range(min_n, max_n + 1):
        grams.extend(wrapped[i : i + n] for i in range(len(wrapped) - n + 1))
    return grams


@dataclass(frozen=True)
class EmbeddingTable:
    """Pretrained vectors keyed by normalised token."""

    dim: int
    entries: Mapping[str, np.ndarray] = field(repr=False)

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, token: str) -> Optional[np.ndarray]:
        return self.entries.get(token)


@dataclass(frozen=True)
class EmbedderConfig:
    dim: int = 32
    seed: int = 0
    ngram_min: int = 3
    ngram_max: int = 5
    bucket_count: int = 1 << 20
    table_path: Optional[str] = None

    @property
    def mode(self) -> str:
        return MODE_TABLE if self.table_path else MODE_HASHED

    def to_json(self) -> dict[str, Any]:
        return {
            "dim": self.dim,
            "seed": self.seed,
            "ngram_min": self.ngram_min,
            "ngram_max": self.ngram_max,
            "bucket_count": self.bucket_count,
            "table_path": self.table_path,
            "mode": self.mode,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "EmbedderConfig":
        return cls(
            dim=int(data["dim"]),
            seed=int(data["seed"]),
            ngram_min=int(data["ngram_min"]),
            ngram_max=int(data["ngram_max"]),
            bucket_count=int(data["bucket_count"]),
            table_path=data.get("table_path"),
        )


class Embedder:
    """Maps token strings to fixed-dimension float32 vectors."""

    def __init__(self, config: EmbedderConfig, table: Optional[EmbeddingTable] = None) -> None:
        if config.dim < 1:
            raise DimensionMismatchError("Embedding dimension must be >= 1")
        if table is not None and table.dim != config.dim:
            raise DimensionMismatchError(f"Table dimension {table.dim} differs from embedder dimension {config.dim}")
        self.config = config
        self.table = table
        self._scale = 1.0 / math.sqrt(config.dim)
        self._tokens: dict[str, np.ndarray] = {}
        self._buckets: dict[int, np.ndarray] = {}
        self._lock = threading.Lock()

    @property
    def dim(self) -> int:
        return self.config.dim

    @property
    def mode(self) -> str:
        return MODE_TABLE if self.table is not None else MODE_HASHED

    def _bucket_vector(self, bucket: int) -> np.ndarray:
        vector = self._buckets.get(bucket)
        if vector is None:
            rng = Xoshiro256(derive_seed(self.config.seed, STREAM_BUCKET, bucket))
            vector = rng.uniform_array(self.config.dim, -1.0, 1.0) * self._scale
            with self._lock:
                self._buckets[bucket] = vector
        return vector

    def hashed(self, token: str) -> np.ndarray:
        """Hashed n-gram embedding of an already normalised, non-empty token."""

        total = np.zeros(self.config.dim, dtype=np.float64)
        for gram in char_ngrams(token, self.config.ngram_min, self.config.ngram_max):
            total += self._bucket_vector(fnv1a_64(gram.encode("utf-8")) % self.config.bucket_count)
        norm = float(np.linalg.norm(total))
        if norm > 0.0:
            total /= norm
        return total.astype(np.float32)

    def embed(self, text: str) -> np.ndarray:
        token = normalize_token(text)
        cached = self._tokens.get(token)
        if cached is not None:
            return cached
        if not token:
            vector = np.zeros(self.config.dim, dtype=np.float32)
        elif self.table is not None and token in self.table.entries:
            vector = np.array(self.table.entries[token], dtype=np.float32)
        else:
            vector = self.hashed(token)
        vector.setflags(write=False)
        with self._lock:
            self._tokens[token] = vector
        return vector


def embed_token(embedder: Embedder, text: str) -> np.ndarray:
    """Embedding of ``text``; the empty token maps to the zero vector."""

    return embedder.embed(text)


def load_embedding_table(path: Path, expected_dim: int) -> EmbeddingTable:
    """Parse a word2vec text file: optional ``count dim`` header, then ``token v1 .. vd`` lines.

    Tokens are normalised on load and later duplicates replace earlier ones.
    """

    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise IoFailureError(f"Unable to read embedding table {path}: {exc}") from exc
    entries: dict[str, np.ndarray] = {}
    first_content = True
    for line_number, line in enumerate(lines, start=1):
        parts = line.split()
        if not parts:
            continue
        if first_content:
            first_content = False
            if len(parts) == 2 and all(part.isdigit() for part in parts):
                declared_dim = int(parts[1])
                if declared_dim != expected_dim:
                    raise DimensionMismatchError(
                        f"{path}: header declares dimension {declared_dim}, expected {expected_dim}"
                    )
                continue
        token = normalize_token(parts[0])
        if not token:
            raise MalformedLineError(line_number, "empty token")
        try:
            values = [float(part) for part in parts[1:]]
        except ValueError as exc:
            raise MalformedLineError(line_number, str(exc)) from exc
        if len(values) != expected_dim:
            raise DimensionMismatchError(
                f"{path}: line {line_number} has {len(values)} components, expected {expected_dim}"
            )
        vector = np.asarray(values, dtype=np.float32)
        if not np.all(np.isfinite(vector)):
            raise MalformedLineError(line_number, "non-finite component")
        vector.setflags(write=False)
        entries[token] = vector
    logger.info("Loaded %d embeddings of dimension %d from %s", len(entries), expected_dim, path)
    return EmbeddingTable(dim=expected_dim, entries=entries)


def build_embedder(config: EmbedderConfig) -> Embedder:
    """Embedder for ``config``, loading its pretrained table when one is configured."""

    table = load_embedding_table(Path(config.table_path), config.dim) if config.table_path else None
    return Embedder(config, table)
