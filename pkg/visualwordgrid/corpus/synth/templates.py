"""Page layout templates for synthetic documents."""

from __future__ import annotations

import abc
from dataclasses import dataclass


@dataclass(frozen=True)
class PageMetrics:
    """Integer geometry of a synthetic page at glyph scale ``scale``."""

    width: int
    height: int
    scale: int

    @property
    def margin(self) -> int:
        return 8 * self.scale

    @property
    def tint_margin(self) -> int:
        return 6 * self.scale

    @property
    def row_pitch(self) -> int:
        return 21 * self.scale

    @property
    def word_gap(self) -> int:
        return 4 * self.scale

    @property
    def keyword_gap(self) -> int:
        return 6 * self.scale

    @property
    def rows(self) -> int:
        return max(1, (self.height - 2 * self.margin) // self.row_pitch)

    def row_y(self, row: int) -> int:
        # Leave tint_margin of headroom above the first line.
        return self.margin + row * self.row_pitch + self.tint_margin


@dataclass(frozen=True)
class Slot:
    """Left edge, baseline top and usable width of one text line."""

    x: int
    y: int
    max_width: int


class LayoutTemplate(abc.ABC):
    """Interface every page layout must follow."""

    @abc.abstractmethod
    def slots(self, metrics: PageMetrics) -> list[Slot]:
        """Return the line slots of a page in fill order."""

    @staticmethod
    def _columns(metrics: PageMetrics, count: int) -> list[tuple[int, int]]:
        usable = metrics.width - 2 * metrics.margin
        column_width = usable // count
        inner = column_width - 2 * metrics.tint_margin
        return [
            (metrics.margin + i * column_width + metrics.tint_margin, max(inner, metrics.scale * 3))
            for i in range(count)
        ]


class SingleColumnTemplate(LayoutTemplate):
    """Lines stacked top to bottom over the full page width."""

    def slots(self, metrics: PageMetrics) -> list[Slot]:
        (x, width), = self._columns(metrics, 1)
        return [Slot(x, metrics.row_y(row), width) for row in range(metrics.rows)]


class TwoColumnRowsTemplate(LayoutTemplate):
    """Two columns filled row by row, left column first."""

    def slots(self, metrics: PageMetrics) -> list[Slot]:
        columns = self._columns(metrics, 2)
        return [Slot(x, metrics.row_y(row), width) for row in range(metrics.rows) for x, width in columns]


class TwoColumnColumnsTemplate(LayoutTemplate):
    """Two columns filled column by column, right column first."""

    def slots(self, metrics: PageMetrics) -> list[Slot]:
        columns = list(reversed(self._columns(metrics, 2)))
        return [Slot(x, metrics.row_y(row), width) for x, width in columns for row in range(metrics.rows)]


TEMPLATES: tuple[LayoutTemplate, ...] = (
    SingleColumnTemplate(),
    TwoColumnRowsTemplate(),
    TwoColumnColumnsTemplate(),
)
