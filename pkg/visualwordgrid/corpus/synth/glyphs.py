"""Blocky 3x5 pseudo-glyphs used to draw synthetic tokens."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ...rng import fnv1a_64

GLYPH_COLS = 3
GLYPH_ROWS = 5
INK = (20, 20, 20)


@lru_cache(maxsize=None)
def glyph_pattern(char: str) -> np.ndarray:
    """Boolean ``(5, 3)`` pattern of ``char``; the top-left pixel is always set."""

    bits = (fnv1a_64(char.encode("utf-8")) & 0x7FFF) | 0x4000
    flat = [(bits >> (14 - i)) & 1 for i in range(GLYPH_ROWS * GLYPH_COLS)]
    pattern = np.array(flat, dtype=bool).reshape(GLYPH_ROWS, GLYPH_COLS)
    pattern.setflags(write=False)
    return pattern


@lru_cache(maxsize=None)
def _scaled(char: str, scale: int) -> np.ndarray:
    return np.kron(glyph_pattern(char), np.ones((scale, scale), dtype=bool)).astype(bool)


def char_advance(scale: int) -> int:
    return (GLYPH_COLS + 1) * scale


def text_width(text: str, scale: int) -> int:
    """Pixel width of ``text``: glyphs separated by one blank column of width ``scale``."""

    return len(text) * char_advance(scale) - scale


def text_height(scale: int) -> int:
    return GLYPH_ROWS * scale


def chars_fitting(width: int, scale: int) -> int:
    return max(0, (width + scale) // char_advance(scale))


def draw_text(pixels: np.ndarray, x: int, y: int, text: str, scale: int) -> None:
    """Stamp the glyphs of ``text`` with their top-left corner at ``(x, y)``."""

    for position, char in enumerate(text):
        mask = _scaled(char, scale)
        left = x + position * char_advance(scale)
        region = pixels[y : y + mask.shape[0], left : left + mask.shape[1]]
        region[mask] = INK
