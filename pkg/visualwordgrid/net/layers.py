"""Forward and backward kernels for channels-last ``(N, H, W, C)`` batches.

Kernels are dtype-generic: they compute in whatever float dtype they receive,
so the same code trains in float32 and is gradient-checked in float64.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def conv_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Stride-1 'same' convolution with a ``(k, k, C_in, C_out)`` kernel, k odd."""

    k = w.shape[0]
    if k == 1:
        return np.tensordot(x, w[0, 0], axes=([3], [0])) + b
    pad = k // 2
    padded = np.pad(x, ((0, 0), (pad, pad), (pad, pad), (0, 0)))
    windows = sliding_window_view(padded, (k, k), axis=(1, 2))  # (N, H, W, C, k, k)
    return np.einsum("nhwcij,ijco->nhwo", windows, w, optimize=True) + b


def conv_backward(
    x: np.ndarray, w: np.ndarray, grad: np.ndarray, *, need_input_grad: bool = True
) -> tuple[np.ndarray | None, np.ndarray, np.ndarray]:
    """Gradients ``(dx, dw, db)`` of :func:`conv_forward` given ``grad`` = dL/dy."""

    k = w.shape[0]
    db = grad.sum(axis=(0, 1, 2))
    if k == 1:
        dw = np.tensordot(x, grad, axes=([0, 1, 2], [0, 1, 2]))[None, None]
        dx = np.tensordot(grad, w[0, 0], axes=([3], [1])) if need_input_grad else None
        return dx, dw, db
    pad = k // 2
    padded = np.pad(x, ((0, 0), (pad, pad), (pad, pad), (0, 0)))
    windows = sliding_window_view(padded, (k, k), axis=(1, 2))
    dw = np.einsum("nhwcij,nhwo->ijco", windows, grad, optimize=True)
    dx = None
    if need_input_grad:
        # Full correlation of the upstream gradient with the flipped kernel.
        grad_padded = np.pad(grad, ((0, 0), (pad, pad), (pad, pad), (0, 0)))
        grad_windows = sliding_window_view(grad_padded, (k, k), axis=(1, 2))
        dx = np.einsum("nhwoij,ijco->nhwc", grad_windows, w[::-1, ::-1], optimize=True)
    return dx, dw, db


def relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0)


def relu_backward(z: np.ndarray, grad: np.ndarray) -> np.ndarray:
    return grad * (z > 0)


def maxpool_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """2x2 max pooling; returns the pooled map and the winning position per window.

    Ties go to the first position in row-major window order.
    """

    n, h, w, c = x.shape
    windows = x.reshape(n, h // 2, 2, w // 2, 2, c).transpose(0, 1, 3, 5, 2, 4).reshape(n, h // 2, w // 2, c, 4)
    argmax = windows.argmax(axis=-1)
    pooled = np.take_along_axis(windows, argmax[..., None], axis=-1)[..., 0]
    return pooled, argmax


def maxpool_backward(grad: np.ndarray, argmax: np.ndarray) -> np.ndarray:
    n, hh, ww, c = grad.shape
    routed = np.zeros((n, hh, ww, c, 4), dtype=grad.dtype)
    np.put_along_axis(routed, argmax[..., None], grad[..., None], axis=-1)
    return routed.reshape(n, hh, ww, c, 2, 2).transpose(0, 1, 4, 2, 5, 3).reshape(n, 2 * hh, 2 * ww, c)


def upsample_forward(x: np.ndarray) -> np.ndarray:
    """2x nearest-neighbour upsampling."""

    return x.repeat(2, axis=1).repeat(2, axis=2)


def upsample_backward(grad: np.ndarray) -> np.ndarray:
    n, h, w, c = grad.shape
    return grad.reshape(n, h // 2, 2, w // 2, 2, c).sum(axis=(2, 4))


def softmax(logits: np.ndarray) -> np.ndarray:
    """Softmax over the last axis after subtracting the row maximum."""

    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def softmax_backward(probs: np.ndarray, grad_probs: np.ndarray) -> np.ndarray:
    """Map dL/dp to dL/dlogits through the softmax Jacobian."""

    return probs * (grad_probs - (grad_probs * probs).sum(axis=-1, keepdims=True))
