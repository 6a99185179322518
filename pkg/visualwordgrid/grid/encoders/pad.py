"""Padded visual encoding: embeddings on text cells, image pixels elsewhere."""

from __future__ import annotations

from ...corpus.types import Document
from ..raster import rasterize_vwg_pad
from .base import EncodedInput, GridEncoder


class PaddedVisualEncoder(GridEncoder):
    kind = "vwg_pad"
    needs_image = True

    @property
    def main_channels(self) -> int:
        return self._spec.d + 3

    def encode(self, doc: Document) -> EncodedInput:
        return EncodedInput(main=rasterize_vwg_pad(doc, self._spec, self._embedder))
