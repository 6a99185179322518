"""Base interface shared by every grid encoder."""

from __future__ import annotations

import abc
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import ClassVar, Optional, Sequence

import numpy as np

from ...corpus.types import Document
from ...embed import Embedder
from ...exceptions import ConfigError
from ...net import VARIANT_DUAL, VARIANT_SINGLE, ArchConfig
from ..spec import GridSpec


@dataclass(frozen=True)
class EncodedInput:
    """Network input for one document; ``aux`` is set only for two-encoder kinds."""

    main: np.ndarray
    aux: Optional[np.ndarray] = None


class GridEncoder(abc.ABC):
    """Interface that every document-to-grid encoding must follow."""

    kind: ClassVar[str]
    needs_image: ClassVar[bool] = False
    needs_embedder: ClassVar[bool] = True

    def __init__(self, *, spec: GridSpec, embedder: Optional[Embedder]):
        if self.needs_embedder and embedder is None:
            raise ConfigError(f"Encoder {self.kind!r} requires an embedder")
        self._spec = spec
        self._embedder = embedder

    @abc.abstractmethod
    def encode(self, doc: Document) -> EncodedInput:
        """Rasterize ``doc`` into the network input tensors."""

    @property
    @abc.abstractmethod
    def main_channels(self) -> int:
        """Channel count of the main input tensor."""

    @property
    def aux_channels(self) -> int:
        return 0

    @property
    def spec(self) -> GridSpec:
        return self._spec

    @property
    def embedder(self) -> Optional[Embedder]:
        return self._embedder

    def arch_for(self, num_classes: int, base_channels: int = 16, depth: int = 3) -> ArchConfig:
        self._spec.check_depth(depth)
        return ArchConfig(
            variant=VARIANT_DUAL if self.aux_channels else VARIANT_SINGLE,
            in_channels_main=self.main_channels,
            in_channels_aux=self.aux_channels,
            num_classes=num_classes,
            base_channels=base_channels,
            depth=depth,
        )

    def encode_many(self, docs: Sequence[Document], *, threads: int = 1) -> list[EncodedInput]:
        """Encode ``docs`` in input order, using up to ``threads`` workers."""

        if threads <= 1 or len(docs) <= 1:
            return [self.encode(doc) for doc in docs]
        with ThreadPoolExecutor(max_workers=threads) as executor:
            return list(executor.map(self.encode, docs))
