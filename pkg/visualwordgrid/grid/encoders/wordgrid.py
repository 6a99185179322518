"""WordGrid encoding: token embeddings placed over their cells."""

from __future__ import annotations

from ...corpus.types import Document
from ..raster import rasterize_wordgrid
from .base import EncodedInput, GridEncoder


class WordGridEncoder(GridEncoder):
    kind = "wordgrid"

    @property
    def main_channels(self) -> int:
        return self._spec.d

    def encode(self, doc: Document) -> EncodedInput:
        return EncodedInput(main=rasterize_wordgrid(doc, self._spec, self._embedder))
