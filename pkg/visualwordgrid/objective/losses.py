"""Cross-entropy, soft Jaccard and their sum over a single probability map.

Every function takes ``probs`` of shape ``(H, W, K+1)`` and an integer
``mask`` of shape ``(H, W)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..corpus.types import FieldSchema
from ..exceptions import ShapeMismatchError
from ..net.layers import softmax_backward

PROB_FLOOR = 1e-12
JACCARD_EPS = 1e-7


@dataclass(frozen=True)
class LossValue:
    ce: float
    jaccard: float

    @property
    def total(self) -> float:
        return self.ce + self.jaccard

    def to_json(self) -> dict[str, float]:
        return {"ce": self.ce, "jaccard": self.jaccard, "total": self.total}


def _check(probs: np.ndarray, mask: np.ndarray, schema: Optional[FieldSchema] = None) -> None:
    if probs.ndim != 3 or mask.shape != probs.shape[:2]:
        raise ShapeMismatchError(f"Probability map {probs.shape} does not match mask {mask.shape}")
    if schema is not None and probs.shape[2] != schema.num_classes:
        raise ShapeMismatchError(f"Probability map has {probs.shape[2]} classes, schema has {schema.num_classes}")
    if mask.size and (mask.min() < 0 or mask.max() >= probs.shape[2]):
        raise ShapeMismatchError("Mask holds class indices outside the probability map")


def _one_hot(mask: np.ndarray, num_classes: int, dtype: np.dtype) -> np.ndarray:
    return (mask[..., None] == np.arange(num_classes)).astype(dtype)


def ce_loss(probs: np.ndarray, mask: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean per-cell cross-entropy and its gradient with respect to the logits."""

    _check(probs, mask)
    cells = mask.size
    p_true = np.take_along_axis(probs, mask[..., None].astype(np.intp), axis=2)[..., 0]
    loss = float(-np.log(np.maximum(p_true, PROB_FLOOR)).mean())
    grad = (probs - _one_hot(mask, probs.shape[2], probs.dtype)) / probs.dtype.type(cells)
    return loss, grad


def jaccard_loss(probs: np.ndarray, mask: np.ndarray, schema: FieldSchema) -> tuple[float, np.ndarray]:
    """``1 - mean_c J_c`` over foreground classes, with the gradient with respect to ``probs``."""

    _check(probs, mask, schema)
    target = _one_hot(mask, probs.shape[2], np.float64)[..., 1:]
    p = probs[..., 1:].astype(np.float64)
    intersection = (p * target).sum(axis=(0, 1)) + JACCARD_EPS
    union = (p + target - p * target).sum(axis=(0, 1)) + JACCARD_EPS
    scores = intersection / union
    foreground = scores.shape[0]
    loss = float(1.0 - scores.mean())

    grad = np.zeros(probs.shape, dtype=np.float64)
    # d(J_c)/dp = (t U - I (1 - t)) / U^2
    grad[..., 1:] = -(target * union - intersection * (1.0 - target)) / (union * union) / foreground
    return loss, grad.astype(probs.dtype)


def combined_loss(probs: np.ndarray, mask: np.ndarray, schema: FieldSchema) -> tuple[LossValue, np.ndarray]:
    """Cross-entropy plus soft Jaccard; the gradient is with respect to the logits."""

    ce, grad_ce = ce_loss(probs, mask)
    jaccard, grad_probs = jaccard_loss(probs, mask, schema)
    return LossValue(ce=ce, jaccard=jaccard), grad_ce + softmax_backward(probs, grad_probs)
