"""Adam with bias correction over named parameter tensors."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from ..exceptions import NonFiniteGradientError, ShapeMismatchError

ParamSet = dict[str, np.ndarray]


@dataclass(frozen=True)
class AdamState:
    m: ParamSet = field(default_factory=dict)
    v: ParamSet = field(default_factory=dict)
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, params: Mapping[str, np.ndarray], *, lr: float = 1e-3) -> "AdamState":
        return cls(
            m={name: np.zeros_like(value) for name, value in params.items()},
            v={name: np.zeros_like(value) for name, value in params.items()},
            lr=lr,
        )


def _check(state: AdamState, params: Mapping[str, np.ndarray], grads: Mapping[str, np.ndarray]) -> None:
    if set(params) != set(grads) or set(params) != set(state.m):
        raise ShapeMismatchError("Parameters, gradients and optimizer moments name different tensors")
    for name, value in params.items():
        if grads[name].shape != value.shape or state.m[name].shape != value.shape:
            raise ShapeMismatchError(f"Tensor {name} has mismatched shapes")
        if not np.all(np.isfinite(grads[name])):
            raise NonFiniteGradientError(f"Gradient of {name} is not finite")


def adam_step(
    state: AdamState, params: Mapping[str, np.ndarray], grads: Mapping[str, np.ndarray]
) -> tuple[AdamState, ParamSet]:
    """Return the advanced state and the updated parameters; inputs are not modified."""

    _check(state, params, grads)
    t = state.t + 1
    correction1 = 1.0 - state.beta1**t
    correction2 = 1.0 - state.beta2**t
    m: ParamSet = {}
    v: ParamSet = {}
    updated: ParamSet = {}
    for name, value in params.items():
        g = grads[name]
        m[name] = state.beta1 * state.m[name] + (1.0 - state.beta1) * g
        v[name] = state.beta2 * state.v[name] + (1.0 - state.beta2) * g * g
        m_hat = m[name] / correction1
        v_hat = v[name] / correction2
        updated[name] = (value - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(value.dtype, copy=False)
    return replace(state, m=m, v=v, t=t), updated
