"""Segmentation network with explicit forward and backward passes."""

from .model import (
    VARIANT_DUAL,
    VARIANT_SINGLE,
    ArchConfig,
    ConvSpec,
    ForwardCache,
    ParamSet,
    backward,
    check_params,
    forward,
    init_params,
    layer_plan,
    param_count,
)

__all__ = [
    "VARIANT_DUAL",
    "VARIANT_SINGLE",
    "ArchConfig",
    "ConvSpec",
    "ForwardCache",
    "ParamSet",
    "backward",
    "check_params",
    "forward",
    "init_params",
    "layer_plan",
    "param_count",
]
