"""Token-level supervision derived from annotated field regions."""

from __future__ import annotations

import numpy as np

from .types import Annotation, Document, FieldSchema, Rect, TokenBox

COVERAGE_THRESHOLD = 0.5


def _covered_area(token: TokenBox, rects: tuple[Rect, ...]) -> int:
    """Pixels of ``token`` inside the union of ``rects``."""

    if not rects:
        return 0
    covered = np.zeros((token.h, token.w), dtype=bool)
    for rect in rects:
        top = max(rect.y, token.y) - token.y
        bottom = min(rect.y + rect.h, token.y + token.h) - token.y
        left = max(rect.x, token.x) - token.x
        right = min(rect.x + rect.w, token.x + token.w) - token.x
        if top < bottom and left < right:
            covered[top:bottom, left:right] = True
    return int(covered.sum())


def derive_ground_truth(document: Document, annotation: Annotation, schema: FieldSchema) -> dict[int, int]:
    """Assign each token the field whose regions cover at least half of its box.

    When several fields reach the threshold the larger overlap wins and ties
    go to the lower class index. Every token receives exactly one class.
    """

    annotation.validate(schema, document.width, document.height)
    assignment: dict[int, int] = {}
    for token in document.tokens:
        best_class, best_area = 0, 0
        for class_index, name in enumerate(schema.field_names, start=1):
            area = _covered_area(token, tuple(annotation.regions.get(name, ())))
            if 2 * area >= token.rect.area and area > best_area:
                best_class, best_area = class_index, area
        assignment[token.index] = best_class
    return assignment
