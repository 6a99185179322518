"""Decoding of probability maps into per-field token sequences."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .corpus.types import Document, FieldSchema, TokenBox
from .embed import normalize_token
from .grid.spec import GridSpec, scale_box

COVERAGE_THRESHOLD = 0.5


@dataclass(frozen=True)
class FieldValue:
    tokens: tuple[int, ...]
    text: str

    def to_json(self) -> dict[str, Any]:
        return {"tokens": list(self.tokens), "text": self.text}


@dataclass(frozen=True)
class FieldPrediction:
    """Decoded fields of one document, keyed by schema field name."""

    doc_id: str
    fields: dict[str, FieldValue]

    def token_sequences(self) -> dict[str, list[str]]:
        return {name: value.text.split() for name, value in self.fields.items()}

    def to_json(self) -> dict[str, Any]:
        return {"id": self.doc_id, "fields": {name: value.to_json() for name, value in self.fields.items()}}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "FieldPrediction":
        fields = {
            str(name): FieldValue(tokens=tuple(int(i) for i in value.get("tokens", ())), text=str(value.get("text", "")))
            for name, value in data["fields"].items()
        }
        return cls(doc_id=str(data["id"]), fields=fields)


def argmax_mask(probs: np.ndarray) -> np.ndarray:
    """Per-cell most probable class; ``np.argmax`` already prefers the lower index."""

    return probs.argmax(axis=-1).astype(np.int64)


def assign_token_class(
    token: TokenBox,
    mask: np.ndarray,
    spec: GridSpec,
    image_width: int,
    image_height: int,
    threshold: float = COVERAGE_THRESHOLD,
) -> int:
    cells = scale_box(token.rect, image_width, image_height, spec)
    labels = mask[cells.rows, cells.cols].ravel()
    counts = np.bincount(labels, minlength=2)[1:]
    if not counts.size or counts.max() == 0:
        return 0
    best = int(counts.argmax())
    if counts[best] / labels.size < threshold:
        return 0
    return best + 1


def decode_fields(
    doc: Document,
    probs: np.ndarray,
    spec: GridSpec,
    schema: FieldSchema,
    threshold: float = COVERAGE_THRESHOLD,
) -> FieldPrediction:
    mask = argmax_mask(probs)
    members: dict[int, list[TokenBox]] = {c: [] for c in range(1, schema.num_classes)}
    for token in doc.tokens:
        cls = assign_token_class(token, mask, spec, doc.width, doc.height, threshold)
        if cls:
            members[cls].append(token)
    fields = {}
    for cls, tokens in members.items():
        ordered = sorted(tokens, key=lambda token: token.index)
        words = [normalize_token(token.text) for token in ordered]
        fields[schema.field_name(cls)] = FieldValue(
            tokens=tuple(token.index for token in ordered),
            text=" ".join(word for word in words if word),
        )
    return FieldPrediction(doc_id=doc.id, fields=fields)
