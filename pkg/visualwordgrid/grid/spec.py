"""Grid geometry: grid size and the mapping from pixel boxes to cell ranges."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from ..corpus.types import Rect
from ..exceptions import ConfigError


@dataclass(frozen=True)
class GridSpec:
    """``H`` rows by ``W`` columns of cells, each carrying ``d``-dimensional embeddings."""

    H: int
    W: int
    d: int

    def __post_init__(self) -> None:
        if self.H < 8 or self.W < 8:
            raise ConfigError(f"Grid must be at least 8x8, got {self.H}x{self.W}")
        if self.d < 1:
            raise ConfigError("Embedding dimension must be >= 1")

    def check_depth(self, depth: int) -> None:
        """Ensure the grid survives ``depth`` 2x2 poolings without remainder."""

        stride = 1 << depth
        if self.H % stride or self.W % stride:
            raise ConfigError(f"Grid {self.H}x{self.W} must be divisible by {stride} for depth {depth}")

    def to_json(self) -> dict[str, int]:
        return {"H": self.H, "W": self.W, "d": self.d}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "GridSpec":
        return cls(H=int(data["H"]), W=int(data["W"]), d=int(data["d"]))


@dataclass(frozen=True)
class CellBox:
    """Half-open cell ranges ``[row_start, row_end) x [col_start, col_end)``."""

    row_start: int
    row_end: int
    col_start: int
    col_end: int

    @property
    def rows(self) -> slice:
        return slice(self.row_start, self.row_end)

    @property
    def cols(self) -> slice:
        return slice(self.col_start, self.col_end)

    @property
    def size(self) -> int:
        return (self.row_end - self.row_start) * (self.col_end - self.col_start)


def _span(start: int, length: int, extent: int, cells: int) -> tuple[int, int]:
    first = start * cells // extent
    last = -((-(start + length) * cells) // extent)
    return first, min(cells, max(first + 1, last))


def scale_box(box: Rect, image_width: int, image_height: int, spec: GridSpec) -> CellBox:
    """Cells touched by ``box``: floor of the start, ceiling of the end, never empty."""

    col_start, col_end = _span(box.x, box.w, image_width, spec.W)
    row_start, row_end = _span(box.y, box.h, image_height, spec.H)
    return CellBox(row_start=row_start, row_end=row_end, col_start=col_start, col_end=col_end)
