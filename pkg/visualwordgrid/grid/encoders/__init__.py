"""Factory helpers for grid encoders."""

from __future__ import annotations

from typing import Optional

from ...embed import Embedder
from ...exceptions import ConfigError
from ..spec import GridSpec
from .base import EncodedInput, GridEncoder
from .layout import LayoutEncoder
from .pad import PaddedVisualEncoder
from .two_encoders import TwoEncoderVisualEncoder
from .wordgrid import WordGridEncoder

ENCODERS: dict[str, type[GridEncoder]] = {
    cls.kind: cls for cls in (LayoutEncoder, WordGridEncoder, PaddedVisualEncoder, TwoEncoderVisualEncoder)
}


def canonical_kind(kind: str) -> str:
    """Map CLI spellings such as ``vwg-pad`` onto encoder kinds."""

    normalized = kind.strip().lower().replace("-", "_")
    if normalized not in ENCODERS:
        raise ConfigError(f"Unsupported encoder kind: {kind}")
    return normalized


def create_encoder(kind: str, spec: GridSpec, embedder: Optional[Embedder] = None) -> GridEncoder:
    """Instantiate the encoder named by ``kind``."""

    return ENCODERS[canonical_kind(kind)](spec=spec, embedder=embedder)


__all__ = [
    "ENCODERS",
    "EncodedInput",
    "GridEncoder",
    "LayoutEncoder",
    "PaddedVisualEncoder",
    "TwoEncoderVisualEncoder",
    "WordGridEncoder",
    "canonical_kind",
    "create_encoder",
]
