"""Deterministic synthetic pseudo-invoices with field annotations.

Each page is a white canvas holding blocks of glyph tokens laid out by one of
the templates in :mod:`.templates`. In the ``text`` variant a unique keyword
precedes every field value. In the ``visual`` variant every field value sits
on a field-specific tinted rectangle and a decoy block with the same token
statistics appears on plain background, so only pixel colour tells the two
apart.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ...exceptions import ConfigError
from ...rng import STREAM_DOCUMENT, STREAM_PALETTE, Xoshiro256, derive_seed
from ...settings import resolve_threads
from ..ground_truth import derive_ground_truth
from ..types import Annotation, Dataset, Document, LabeledDocument, Rect, RGBImage, SynthConfig, TokenBox
from .glyphs import chars_fitting, draw_text, text_height, text_width
from .templates import TEMPLATES, PageMetrics, Slot
from .values import filler_tokens, keyword, value_tokens

logger = logging.getLogger(__name__)

FIELD_PRESENCE = 0.9
WHITE = (255, 255, 255)

__all__ = ["synth_generate", "generate_document", "field_palette"]


@dataclass
class _Block:
    kind: str  # "field", "decoy" or "filler"
    words: list[str]
    class_index: int = 0  # decoys carry the class of the field they mimic
    label: Optional[str] = None


@dataclass
class _PlacedLine:
    block: _Block
    tokens: list[tuple[str, int, int, int, int]] = field(default_factory=list)  # text, x, y, w, h
    value_start: int = 0  # index of the first value token (after the keyword)

    @property
    def values(self) -> list[tuple[str, int, int, int, int]]:
        return self.tokens[self.value_start :]


@dataclass(frozen=True)
class _Layout:
    slots: list[Slot]
    placeable: list[int]  # class indices a slot can hold with their keyword or decoy


def glyph_scale(width: int, height: int) -> int:
    return max(1, min(width, height) // 192)


def field_palette(seed: int, num_fields: int) -> list[tuple[int, int, int]]:
    """Distinct light tints, one per field, drawn from the dataset seed."""

    rng = Xoshiro256(derive_seed(seed, STREAM_PALETTE))
    palette: list[tuple[int, int, int]] = []
    for _ in range(num_fields):
        candidate = (0, 0, 0)
        for _attempt in range(1000):
            candidate = (rng.randint(96, 224), rng.randint(96, 224), rng.randint(96, 224))
            if all(max(abs(a - b) for a, b in zip(candidate, other)) >= 48 for other in palette):
                break
        palette.append(candidate)
    return palette


def _slots_per_field(variant: str) -> int:
    return 2 if variant == "visual" else 1


def _placeable_fields(config: SynthConfig, slots: list[Slot], metrics: PageMetrics) -> list[int]:
    if len(slots) < _slots_per_field(config.variant):
        return []
    scale = metrics.scale
    # Worst case after the horizontal jitter of _fit_line.
    room = min(slot.max_width for slot in slots) - 2 * scale
    first_char = text_width("0", scale)
    placeable = []
    for class_index, name in enumerate(config.fields.field_names, start=1):
        needed = first_char
        if config.variant == "text":
            needed += text_width(keyword(name), scale) + metrics.keyword_gap
        if needed <= room:
            placeable.append(class_index)
    return placeable


def _page_layouts(config: SynthConfig) -> list[_Layout]:
    """Templates able to hold at least one field of ``config`` on its page.

    Raises ``ConfigError`` when no template can, e.g. keywords wider than the page.
    """

    width, height = config.image_width, config.image_height
    metrics = PageMetrics(width, height, glyph_scale(width, height))
    layouts = []
    for template in TEMPLATES:
        slots = template.slots(metrics)
        placeable = _placeable_fields(config, slots, metrics)
        if placeable:
            layouts.append(_Layout(slots, placeable))
    if not layouts:
        raise ConfigError(
            f"A {width}x{height} page cannot hold any {config.variant}-keyed field of {config.fields.field_names}"
        )
    return layouts


def _build_blocks(config: SynthConfig, layout: _Layout, rng: Xoshiro256) -> list[_Block]:
    """Field blocks with their decoys, then fillers for the slots left over.

    Fields that do not fit are absent; a field never loses its decoy or keyword.
    """

    names = config.fields.field_names
    present = [index for index in layout.placeable if rng.bernoulli(FIELD_PRESENCE)]
    if not present:
        present = [rng.choice(layout.placeable)]
    per_field = _slots_per_field(config.variant)
    capacity = len(layout.slots) // per_field
    if len(present) > capacity:
        rng.shuffle(present)
        present = sorted(present[:capacity])

    blocks: list[_Block] = []
    for class_index in present:
        name = names[class_index - 1]
        words = value_tokens(rng, name)
        label = keyword(name) if config.variant == "text" else None
        blocks.append(_Block("field", words, class_index=class_index, label=label))
        if config.variant == "visual":
            blocks.append(_Block("decoy", value_tokens(rng, name, count=len(words)), class_index=class_index))
    free = len(layout.slots) - len(blocks)
    fillers = min(free, rng.randint(2, 4))
    blocks.extend(_Block("filler", filler_tokens(rng)) for _ in range(fillers))
    return blocks


def _fit_line(block: _Block, slot: Slot, metrics: PageMetrics, rng: Xoshiro256) -> _PlacedLine:
    scale = metrics.scale
    x = slot.x + rng.randint(0, 2 * scale)
    y = slot.y + rng.randint(-scale, scale)
    right = slot.x + slot.max_width
    height = text_height(scale)
    line = _PlacedLine(block)
    cursor = x
    if block.label is not None:
        width = text_width(block.label, scale)
        line.tokens.append((block.label, cursor, y, width, height))
        cursor += width + metrics.keyword_gap
        line.value_start = 1
    for position, word in enumerate(block.words):
        width = text_width(word, scale)
        if cursor + width > right:
            if position > 0:
                break
            word = word[: max(1, chars_fitting(right - cursor, scale))]
            width = text_width(word, scale)
        line.tokens.append((word, cursor, y, width, height))
        cursor += width + metrics.word_gap
    return line


def _match_decoys(lines: list[_PlacedLine]) -> None:
    """Cut each field value and its decoy to the same number of tokens."""

    fields = {line.block.class_index: line for line in lines if line.block.kind == "field"}
    for decoy in (line for line in lines if line.block.kind == "decoy"):
        value = fields[decoy.block.class_index]
        count = min(len(value.values), len(decoy.tokens))
        value.tokens = value.tokens[: value.value_start + count]
        decoy.tokens = decoy.tokens[:count]


def generate_document(
    config: SynthConfig,
    index: int,
    palette: list[tuple[int, int, int]],
    layouts: Optional[list[_Layout]] = None,
) -> LabeledDocument:
    """Generate document ``index`` of the dataset described by ``config``."""

    rng = Xoshiro256(derive_seed(config.seed, STREAM_DOCUMENT, index))
    width, height = config.image_width, config.image_height
    metrics = PageMetrics(width, height, glyph_scale(width, height))
    layouts = layouts or _page_layouts(config)
    layout = layouts[rng.below(len(layouts))]

    blocks = _build_blocks(config, layout, rng)
    rng.shuffle(blocks)
    lines = [_fit_line(block, slot, metrics, rng) for block, slot in zip(blocks, layout.slots)]
    _match_decoys(lines)

    pixels = np.full((height, width, 3), WHITE, dtype=np.uint8)
    regions: dict[str, tuple[Rect, ...]] = {name: () for name in config.fields.field_names}
    for line in lines:
        if line.block.kind != "field":
            continue
        values = line.values
        left = min(t[1] for t in values)
        top = min(t[2] for t in values)
        right = max(t[1] + t[3] for t in values)
        bottom = max(t[2] + t[4] for t in values)
        if config.variant == "visual":
            pad = metrics.tint_margin
            tint = palette[line.block.class_index - 1]
            pixels[max(0, top - pad) : min(height, bottom + pad), max(0, left - pad) : min(width, right + pad)] = tint
        pad = metrics.scale
        x0, y0 = max(0, left - pad), max(0, top - pad)
        x1, y1 = min(width, right + pad), min(height, bottom + pad)
        name = config.fields.field_name(line.block.class_index)
        regions[name] = (Rect(x0, y0, x1 - x0, y1 - y0),)

    placed = sorted(
        (token for line in lines for token in line.tokens),
        key=lambda token: (token[2], token[1]),
    )
    tokens = []
    for position, (text, x, y, w, h) in enumerate(placed):
        draw_text(pixels, x, y, text, metrics.scale)
        tokens.append(TokenBox(index=position, text=text, x=x, y=y, w=w, h=h))

    document = Document(
        id=f"doc_{index:05d}",
        width=width,
        height=height,
        tokens=tuple(tokens),
        image=RGBImage(width=width, height=height, pixels=pixels),
    )
    annotation = Annotation(regions)
    return LabeledDocument(
        document=document,
        annotation=annotation,
        gt_assignment=derive_ground_truth(document, annotation, config.fields),
    )


def synth_generate(config: SynthConfig, *, threads: int = 0) -> Dataset:
    """Generate ``config.num_docs`` labeled documents; identical seeds give identical data."""

    layouts = _page_layouts(config)
    palette = field_palette(config.seed, config.fields.num_fields)
    with ThreadPoolExecutor(max_workers=resolve_threads(threads)) as pool:
        docs = list(pool.map(lambda i: generate_document(config, i, palette, layouts), range(config.num_docs)))
    logger.info(
        "Generated %d %s-keyed documents (seed=%d, %dx%d)",
        len(docs),
        config.variant,
        config.seed,
        config.image_width,
        config.image_height,
    )
    return Dataset(schema=config.fields, docs=tuple(docs))
