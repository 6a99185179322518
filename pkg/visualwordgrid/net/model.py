"""Encoder-decoder segmentation network with skip connections.

Encoder stage ``s`` applies two 3x3 conv + ReLU at width ``base * 2**s`` and
keeps the result as a skip before 2x2 max pooling; a bottleneck pair runs at
width ``base * 2**depth``. Each decoder stage upsamples 2x, applies a 3x3
conv + ReLU, concatenates the skips of every encoder at that resolution and
fuses them with two more 3x3 conv + ReLU. A 1x1 conv produces the class
logits and a per-cell softmax the probabilities.

The dual variant runs a second encoder on the auxiliary input; the two
bottleneck outputs are concatenated before the first decoder stage, and every
decoder stage concatenates the skips of both encoders.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

import numpy as np

from ..exceptions import ConfigError, ShapeMismatchError
from ..rng import STREAM_INIT, Xoshiro256, derive_seed
from . import layers

ParamSet = dict[str, np.ndarray]

VARIANT_SINGLE = "single"
VARIANT_DUAL = "dual"


@dataclass(frozen=True)
class ArchConfig:
    variant: str
    in_channels_main: int
    num_classes: int
    in_channels_aux: int = 0
    base_channels: int = 16
    depth: int = 3

    def __post_init__(self) -> None:
        if self.variant not in {VARIANT_SINGLE, VARIANT_DUAL}:
            raise ConfigError(f"Unknown network variant {self.variant!r}")
        if self.depth < 1:
            raise ConfigError("depth must be >= 1")
        if self.base_channels < 4:
            raise ConfigError("base_channels must be >= 4")
        if self.num_classes < 2:
            raise ConfigError("num_classes must be >= 2")
        if self.in_channels_main < 1:
            raise ConfigError("in_channels_main must be >= 1")
        if self.variant == VARIANT_DUAL and self.in_channels_aux < 1:
            raise ConfigError("The dual variant needs in_channels_aux >= 1")
        if self.variant == VARIANT_SINGLE and self.in_channels_aux:
            raise ConfigError("The single variant takes no auxiliary input")

    @property
    def num_encoders(self) -> int:
        return 2 if self.variant == VARIANT_DUAL else 1

    def width(self, stage: int) -> int:
        return self.base_channels * (1 << stage)

    def encoder_inputs(self) -> list[int]:
        return [self.in_channels_main] + ([self.in_channels_aux] if self.variant == VARIANT_DUAL else [])

    def to_json(self) -> dict[str, Any]:
        return {
            "variant": self.variant,
            "in_channels_main": self.in_channels_main,
            "in_channels_aux": self.in_channels_aux,
            "num_classes": self.num_classes,
            "base_channels": self.base_channels,
            "depth": self.depth,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "ArchConfig":
        return cls(
            variant=str(data["variant"]),
            in_channels_main=int(data["in_channels_main"]),
            in_channels_aux=int(data.get("in_channels_aux", 0)),
            num_classes=int(data["num_classes"]),
            base_channels=int(data["base_channels"]),
            depth=int(data["depth"]),
        )


@dataclass(frozen=True)
class ConvSpec:
    name: str
    kernel: int
    in_channels: int
    out_channels: int

    @property
    def weight_shape(self) -> tuple[int, int, int, int]:
        return (self.kernel, self.kernel, self.in_channels, self.out_channels)

    @property
    def fan_in(self) -> int:
        return self.kernel * self.kernel * self.in_channels

    @property
    def size(self) -> int:
        return self.fan_in * self.out_channels + self.out_channels


def layer_plan(arch: ArchConfig) -> list[ConvSpec]:
    """Every convolution of ``arch`` in forward order."""

    plan: list[ConvSpec] = []
    for e, channels in enumerate(arch.encoder_inputs()):
        previous = channels
        for s in range(arch.depth):
            plan.append(ConvSpec(f"enc{e}.s{s}.conv1", 3, previous, arch.width(s)))
            plan.append(ConvSpec(f"enc{e}.s{s}.conv2", 3, arch.width(s), arch.width(s)))
            previous = arch.width(s)
        plan.append(ConvSpec(f"enc{e}.bottleneck.conv1", 3, previous, arch.width(arch.depth)))
        plan.append(ConvSpec(f"enc{e}.bottleneck.conv2", 3, arch.width(arch.depth), arch.width(arch.depth)))
    incoming = arch.num_encoders * arch.width(arch.depth)
    for s in reversed(range(arch.depth)):
        plan.append(ConvSpec(f"dec.s{s}.up", 3, incoming, arch.width(s)))
        plan.append(ConvSpec(f"dec.s{s}.fuse1", 3, (1 + arch.num_encoders) * arch.width(s), arch.width(s)))
        plan.append(ConvSpec(f"dec.s{s}.fuse2", 3, arch.width(s), arch.width(s)))
        incoming = arch.width(s)
    plan.append(ConvSpec("head", 1, arch.width(0), arch.num_classes))
    return plan


def param_count(arch: ArchConfig) -> int:
    """Number of scalar weights and biases."""

    return sum(spec.size for spec in layer_plan(arch))


def init_params(arch: ArchConfig, seed: int, dtype: np.dtype = np.float32) -> ParamSet:
    """He-uniform kernels in ``±sqrt(6 / fan_in)`` and zero biases."""

    rng = Xoshiro256(derive_seed(seed, STREAM_INIT))
    params: ParamSet = {}
    for spec in layer_plan(arch):
        bound = float(np.sqrt(6.0 / spec.fan_in))
        count = int(np.prod(spec.weight_shape))
        params[f"{spec.name}.w"] = rng.uniform_array(count, -bound, bound).reshape(spec.weight_shape).astype(dtype)
        params[f"{spec.name}.b"] = np.zeros(spec.out_channels, dtype=dtype)
    return params


def check_params(params: Mapping[str, np.ndarray], arch: ArchConfig) -> None:
    for spec in layer_plan(arch):
        for key, shape in ((f"{spec.name}.w", spec.weight_shape), (f"{spec.name}.b", (spec.out_channels,))):
            if key not in params:
                raise ShapeMismatchError(f"Missing parameter {key}")
            if params[key].shape != shape:
                raise ShapeMismatchError(f"Parameter {key} has shape {params[key].shape}, expected {shape}")


@dataclass
class ForwardCache:
    """Activations recorded by :func:`forward` for :func:`backward`."""

    arch: ArchConfig
    batched: bool
    conv_inputs: dict[str, np.ndarray] = field(default_factory=dict)
    pre_activations: dict[str, np.ndarray] = field(default_factory=dict)
    pool_argmax: dict[str, np.ndarray] = field(default_factory=dict)
    logits: Optional[np.ndarray] = None
    probs: Optional[np.ndarray] = None


def _as_batch(tensor: np.ndarray, name: str) -> np.ndarray:
    if tensor.ndim == 3:
        return tensor[None]
    if tensor.ndim == 4:
        return tensor
    raise ShapeMismatchError(f"{name} must have shape (H, W, C) or (N, H, W, C), got {tensor.shape}")


def _check_inputs(arch: ArchConfig, inputs: list[np.ndarray]) -> None:
    stride = 1 << arch.depth
    expected = arch.encoder_inputs()
    reference = inputs[0].shape[:3]
    for position, (tensor, channels) in enumerate(zip(inputs, expected)):
        label = "input_main" if position == 0 else "input_aux"
        if tensor.shape[3] != channels:
            raise ShapeMismatchError(f"{label} has {tensor.shape[3]} channels, architecture expects {channels}")
        if tensor.shape[:3] != reference:
            raise ShapeMismatchError("input_main and input_aux must share batch and grid size")
        if tensor.shape[1] % stride or tensor.shape[2] % stride:
            raise ShapeMismatchError(f"Grid {tensor.shape[1]}x{tensor.shape[2]} is not divisible by {stride}")


def _conv_relu(params: Mapping[str, np.ndarray], cache: ForwardCache, name: str, x: np.ndarray) -> np.ndarray:
    z = layers.conv_forward(x, params[f"{name}.w"], params[f"{name}.b"])
    cache.conv_inputs[name] = x
    cache.pre_activations[name] = z
    return layers.relu(z)


def forward(
    params: Mapping[str, np.ndarray],
    arch: ArchConfig,
    input_main: np.ndarray,
    input_aux: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, ForwardCache]:
    """Class probabilities ``(H, W, K+1)`` (or ``(N, H, W, K+1)`` for a batch)."""

    if (input_aux is not None) != (arch.variant == VARIANT_DUAL):
        wanted = "requires" if arch.variant == VARIANT_DUAL else "does not accept"
        raise ShapeMismatchError(f"The {arch.variant} architecture {wanted} an auxiliary input")
    batched = input_main.ndim == 4
    inputs = [_as_batch(input_main, "input_main")]
    if input_aux is not None:
        inputs.append(_as_batch(input_aux, "input_aux"))
    _check_inputs(arch, inputs)
    check_params(params, arch)

    cache = ForwardCache(arch=arch, batched=batched)
    skips: list[list[np.ndarray]] = []
    bottlenecks: list[np.ndarray] = []
    for e, x in enumerate(inputs):
        h = x
        skips.append([])
        for s in range(arch.depth):
            h = _conv_relu(params, cache, f"enc{e}.s{s}.conv1", h)
            h = _conv_relu(params, cache, f"enc{e}.s{s}.conv2", h)
            skips[e].append(h)
            h, cache.pool_argmax[f"enc{e}.s{s}"] = layers.maxpool_forward(h)
        h = _conv_relu(params, cache, f"enc{e}.bottleneck.conv1", h)
        h = _conv_relu(params, cache, f"enc{e}.bottleneck.conv2", h)
        bottlenecks.append(h)

    h = np.concatenate(bottlenecks, axis=3)
    for s in reversed(range(arch.depth)):
        up = _conv_relu(params, cache, f"dec.s{s}.up", layers.upsample_forward(h))
        fused = np.concatenate([up] + [skips[e][s] for e in range(len(inputs))], axis=3)
        h = _conv_relu(params, cache, f"dec.s{s}.fuse1", fused)
        h = _conv_relu(params, cache, f"dec.s{s}.fuse2", h)

    cache.conv_inputs["head"] = h
    logits = layers.conv_forward(h, params["head.w"], params["head.b"])
    probs = layers.softmax(logits)
    cache.logits = logits
    cache.probs = probs
    if not batched:
        return probs[0], cache
    return probs, cache


def _conv_relu_backward(
    params: Mapping[str, np.ndarray],
    cache: ForwardCache,
    grads: ParamSet,
    name: str,
    grad: np.ndarray,
    *,
    need_input_grad: bool = True,
) -> Optional[np.ndarray]:
    grad_z = layers.relu_backward(cache.pre_activations[name], grad)
    dx, dw, db = layers.conv_backward(
        cache.conv_inputs[name], params[f"{name}.w"], grad_z, need_input_grad=need_input_grad
    )
    grads[f"{name}.w"] = dw
    grads[f"{name}.b"] = db
    return dx


def backward(
    params: Mapping[str, np.ndarray],
    arch: ArchConfig,
    cache: ForwardCache,
    grad_logits: np.ndarray,
) -> ParamSet:
    """Exact gradients of every parameter given dL/dlogits."""

    if cache.logits is None or cache.arch != arch:
        raise ShapeMismatchError("Forward cache was produced by a different architecture")
    grad = grad_logits[None] if not cache.batched and grad_logits.ndim == 3 else grad_logits
    if grad.shape != cache.logits.shape:
        raise ShapeMismatchError(f"Gradient shape {grad_logits.shape} does not match logits {cache.logits.shape}")

    grads: ParamSet = {}
    dx, dw, db = layers.conv_backward(cache.conv_inputs["head"], params["head.w"], grad)
    grads["head.w"], grads["head.b"] = dw, db
    grad = dx

    skip_grads: dict[tuple[int, int], np.ndarray] = {}
    for s in range(arch.depth):
        width = arch.width(s)
        grad = _conv_relu_backward(params, cache, grads, f"dec.s{s}.fuse2", grad)
        grad = _conv_relu_backward(params, cache, grads, f"dec.s{s}.fuse1", grad)
        for e in range(arch.num_encoders):
            skip_grads[(e, s)] = grad[..., (1 + e) * width : (2 + e) * width]
        grad = _conv_relu_backward(params, cache, grads, f"dec.s{s}.up", grad[..., :width])
        grad = layers.upsample_backward(grad)

    bottleneck_width = arch.width(arch.depth)
    for e in range(arch.num_encoders):
        h = grad[..., e * bottleneck_width : (e + 1) * bottleneck_width]
        h = _conv_relu_backward(params, cache, grads, f"enc{e}.bottleneck.conv2", h)
        h = _conv_relu_backward(params, cache, grads, f"enc{e}.bottleneck.conv1", h)
        for s in reversed(range(arch.depth)):
            h = layers.maxpool_backward(h, cache.pool_argmax[f"enc{e}.s{s}"]) + skip_grads[(e, s)]
            h = _conv_relu_backward(params, cache, grads, f"enc{e}.s{s}.conv2", h)
            h = _conv_relu_backward(
                params, cache, grads, f"enc{e}.s{s}.conv1", h, need_input_grad=s > 0
            )
    return {key: grads[key].astype(params[key].dtype, copy=False) for key in params}
