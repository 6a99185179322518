"""Document data model shared by loading, generation, encoding and scoring."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional

import numpy as np

from ..exceptions import BoxOutOfBoundsError, ConfigError, MalformedFileError, UnknownFieldError

DEFAULT_FIELDS = ("receiver", "supplier", "invoice_info", "total")


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in source-image pixels."""

    x: int
    y: int
    w: int
    h: int

    @property
    def area(self) -> int:
        return self.w * self.h

    def inside(self, width: int, height: int) -> bool:
        return self.w >= 1 and self.h >= 1 and self.x >= 0 and self.y >= 0 and self.x + self.w <= width and self.y + self.h <= height

    def to_json(self) -> dict[str, int]:
        return {"x": self.x, "y": self.y, "w": self.w, "h": self.h}


@dataclass(frozen=True)
class TokenBox:
    """One OCR token: its reading-order index, text and pixel box."""

    index: int
    text: str
    x: int
    y: int
    w: int
    h: int

    @property
    def rect(self) -> Rect:
        return Rect(self.x, self.y, self.w, self.h)

    def to_json(self) -> dict[str, object]:
        return {"text": self.text, "x": self.x, "y": self.y, "w": self.w, "h": self.h}


@dataclass(frozen=True)
class RGBImage:
    """Page raster stored as a read-only ``(height, width, 3)`` uint8 array."""

    width: int
    height: int
    pixels: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        pixels = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if pixels.shape != (self.height, self.width, 3):
            raise MalformedFileError(
                f"Pixel buffer of shape {pixels.shape} does not match {self.width}x{self.height} RGB"
            )
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)


@dataclass(frozen=True)
class Document:
    """OCR tokens of one page plus its optional image."""

    id: str
    width: int
    height: int
    tokens: tuple[TokenBox, ...]
    image: Optional[RGBImage] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.width < 1 or self.height < 1:
            raise MalformedFileError(f"{self.id}: page size must be positive")
        if self.image is not None and (self.image.width, self.image.height) != (self.width, self.height):
            raise MalformedFileError(
                f"{self.id}: image is {self.image.width}x{self.image.height} but OCR page is "
                f"{self.width}x{self.height}"
            )
        for position, token in enumerate(self.tokens):
            if token.index != position:
                raise MalformedFileError(f"{self.id}: token indices must be 0..n-1 in order")
            if not token.text.strip():
                raise MalformedFileError(f"{self.id}: tokens[{position}].text is empty")
            if not token.rect.inside(self.width, self.height):
                raise BoxOutOfBoundsError(
                    f"{self.id}: tokens[{position}] box {token.rect} leaves the {self.width}x{self.height} page"
                )


@dataclass(frozen=True)
class FieldSchema:
    """Ordered field names; field ``i`` is class ``i + 1`` and class 0 is background."""

    field_names: tuple[str, ...] = DEFAULT_FIELDS

    def __post_init__(self) -> None:
        names = tuple(str(name) for name in self.field_names)
        if not names:
            raise ConfigError("A field schema needs at least one field")
        if any(not name for name in names):
            raise ConfigError("Field names must be non-empty")
        if len(set(names)) != len(names):
            raise ConfigError(f"Field names must be unique: {names}")
        object.__setattr__(self, "field_names", names)

    @property
    def num_fields(self) -> int:
        return len(self.field_names)

    @property
    def num_classes(self) -> int:
        return len(self.field_names) + 1

    def class_index(self, name: str) -> int:
        try:
            return self.field_names.index(name) + 1
        except ValueError as exc:
            raise UnknownFieldError(f"Field {name!r} is not part of the schema") from exc

    def field_name(self, class_index: int) -> str:
        return self.field_names[class_index - 1]

    def to_json(self) -> dict[str, list[str]]:
        return {"fields": list(self.field_names)}

    @classmethod
    def from_json(cls, data: object) -> "FieldSchema":
        if not isinstance(data, dict) or not isinstance(data.get("fields"), list):
            raise MalformedFileError("schema must be an object with a 'fields' list")
        if not all(isinstance(name, str) for name in data["fields"]):
            raise MalformedFileError("schema.fields must contain strings")
        try:
            return cls(tuple(data["fields"]))
        except ConfigError as exc:
            raise MalformedFileError(f"Invalid schema: {exc}") from exc


@dataclass(frozen=True)
class Annotation:
    """Field regions of one page; an empty tuple means the field is absent."""

    regions: Mapping[str, tuple[Rect, ...]]

    @classmethod
    def empty(cls, schema: FieldSchema) -> "Annotation":
        return cls({name: () for name in schema.field_names})

    def validate(self, schema: FieldSchema, width: int, height: int) -> None:
        for name, rects in self.regions.items():
            if name not in schema.field_names:
                raise UnknownFieldError(f"Annotation names unknown field {name!r}")
            for position, rect in enumerate(rects):
                if not rect.inside(width, height):
                    raise BoxOutOfBoundsError(
                        f"Region {name}[{position}] {rect} leaves the {width}x{height} page"
                    )

    def to_json(self) -> dict[str, object]:
        return {"fields": {name: [rect.to_json() for rect in rects] for name, rects in self.regions.items()}}


@dataclass(frozen=True)
class LabeledDocument:
    """A document, its annotation and the derived token -> class assignment."""

    document: Document
    annotation: Annotation
    gt_assignment: Mapping[int, int]

    @property
    def id(self) -> str:
        return self.document.id

    def field_token_indices(self, schema: FieldSchema) -> dict[str, list[int]]:
        """Ground-truth token indices per field, in reading order."""

        fields: dict[str, list[int]] = {name: [] for name in schema.field_names}
        for token in self.document.tokens:
            class_index = self.gt_assignment.get(token.index, 0)
            if class_index:
                fields[schema.field_name(class_index)].append(token.index)
        return fields


@dataclass(frozen=True)
class Dataset:
    """Labeled documents sharing one schema."""

    schema: FieldSchema
    docs: tuple[LabeledDocument, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "docs", tuple(self.docs))

    def __len__(self) -> int:
        return len(self.docs)

    def __iter__(self) -> Iterator[LabeledDocument]:
        return iter(self.docs)

    def subset(self, indices: list[int]) -> list[LabeledDocument]:
        return [self.docs[i] for i in indices]


@dataclass(frozen=True)
class SynthConfig:
    """Recipe for a deterministic synthetic invoice dataset."""

    num_docs: int
    variant: str = "visual"
    image_width: int = 384
    image_height: int = 512
    seed: int = 0
    fields: FieldSchema = field(default_factory=FieldSchema)

    def __post_init__(self) -> None:
        if self.num_docs < 1:
            raise ConfigError("num_docs must be >= 1")
        if self.variant not in {"text", "visual"}:
            raise ConfigError(f"variant must be 'text' or 'visual', got {self.variant!r}")
        if self.image_width < 64 or self.image_height < 64:
            raise ConfigError("image dimensions must be >= 64 pixels")
