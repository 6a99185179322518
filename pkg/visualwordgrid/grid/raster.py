"""Rasterisation of documents into grid encodings and label masks.

All tensors are channels-last float32 arrays of shape ``(H, W, C)``. When token
boxes overlap, tokens are painted in OCR order so the later token wins.
"""

from __future__ import annotations

import numpy as np

from ..corpus.types import Document, LabeledDocument, RGBImage
from ..embed import Embedder
from ..exceptions import DimensionMismatchError, MissingImageError
from .spec import CellBox, GridSpec, scale_box


def token_cells(doc: Document, spec: GridSpec) -> list[CellBox]:
    """Cell box of every token, in OCR order."""

    return [scale_box(token.rect, doc.width, doc.height, spec) for token in doc.tokens]


def coverage_mask(doc: Document, spec: GridSpec) -> np.ndarray:
    """Boolean ``(H, W)`` map of cells covered by at least one token."""

    covered = np.zeros((spec.H, spec.W), dtype=bool)
    for cells in token_cells(doc, spec):
        covered[cells.rows, cells.cols] = True
    return covered


def resize_image(image: RGBImage, H: int, W: int) -> np.ndarray:
    """Nearest-neighbour resize sampling each cell centre, scaled to ``[0, 1]``."""

    rows = ((2 * np.arange(H) + 1) * image.height) // (2 * H)
    cols = ((2 * np.arange(W) + 1) * image.width) // (2 * W)
    sampled = image.pixels[rows[:, None], cols[None, :]]
    return sampled.astype(np.float32) / np.float32(255.0)


def rasterize_layout(doc: Document, spec: GridSpec) -> np.ndarray:
    """``(H, W, 3)`` layout-only encoding: 1 on covered cells, 0 elsewhere."""

    covered = coverage_mask(doc, spec).astype(np.float32)
    return np.repeat(covered[:, :, None], 3, axis=2)


def rasterize_wordgrid(doc: Document, spec: GridSpec, embedder: Embedder) -> np.ndarray:
    """``(H, W, d)`` WordGrid: each covered cell holds its token's embedding."""

    if embedder.dim != spec.d:
        raise DimensionMismatchError(f"Embedder dimension {embedder.dim} differs from grid d={spec.d}")
    grid = np.zeros((spec.H, spec.W, spec.d), dtype=np.float32)
    for token, cells in zip(doc.tokens, token_cells(doc, spec)):
        grid[cells.rows, cells.cols, :] = embedder.embed(token.text)
    return grid


def _require_image(doc: Document) -> RGBImage:
    if doc.image is None:
        raise MissingImageError(f"Document {doc.id} has no image")
    return doc.image


def rasterize_vwg_pad(doc: Document, spec: GridSpec, embedder: Embedder) -> np.ndarray:
    """``(H, W, d + 3)`` padded encoding: embeddings on covered cells, RGB elsewhere."""

    image = _require_image(doc)
    wordgrid = rasterize_wordgrid(doc, spec, embedder)
    rgb = resize_image(image, spec.H, spec.W)
    rgb[coverage_mask(doc, spec)] = 0.0
    return np.concatenate([wordgrid, rgb], axis=2)


def make_two_encoder_inputs(doc: Document, spec: GridSpec, embedder: Embedder) -> tuple[np.ndarray, np.ndarray]:
    """WordGrid plus the full resized image for the two-encoder network."""

    image = _require_image(doc)
    return rasterize_wordgrid(doc, spec, embedder), resize_image(image, spec.H, spec.W)


def rasterize_target_mask(ldoc: LabeledDocument, spec: GridSpec) -> np.ndarray:
    """``(H, W)`` int64 class mask painted from the token ground truth."""

    mask = np.zeros((spec.H, spec.W), dtype=np.int64)
    for token, cells in zip(ldoc.document.tokens, token_cells(ldoc.document, spec)):
        mask[cells.rows, cells.cols] = ldoc.gt_assignment.get(token.index, 0)
    return mask
