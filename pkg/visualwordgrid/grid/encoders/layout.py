"""Layout-only encoding: token coverage without text or pixels."""

from __future__ import annotations

from ...corpus.types import Document
from ..raster import rasterize_layout
from .base import EncodedInput, GridEncoder


class LayoutEncoder(GridEncoder):
    kind = "layout"
    needs_embedder = False

    @property
    def main_channels(self) -> int:
        return 3

    def encode(self, doc: Document) -> EncodedInput:
        return EncodedInput(main=rasterize_layout(doc, self._spec))
