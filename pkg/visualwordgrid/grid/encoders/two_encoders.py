"""WordGrid and resized image fed to separate network encoders."""

from __future__ import annotations

from ...corpus.types import Document
from ..raster import make_two_encoder_inputs
from .base import EncodedInput, GridEncoder


class TwoEncoderVisualEncoder(GridEncoder):
    kind = "vwg_2enc"
    needs_image = True

    @property
    def main_channels(self) -> int:
        return self._spec.d

    @property
    def aux_channels(self) -> int:
        return 3

    def encode(self, doc: Document) -> EncodedInput:
        wordgrid, image = make_two_encoder_inputs(doc, self._spec, self._embedder)
        return EncodedInput(main=wordgrid, aux=image)
