"""Losses, optimizer, training loop and checkpoint files."""

from .adam import AdamState, adam_step
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .losses import LossValue, ce_loss, combined_loss, jaccard_loss
from .trainer import (
    EpochRecord,
    PreparedSplit,
    TrainConfig,
    TrainResult,
    mean_iou,
    predict_probs,
    prepare_split,
    train,
)

__all__ = [
    "AdamState",
    "Checkpoint",
    "EpochRecord",
    "LossValue",
    "PreparedSplit",
    "TrainConfig",
    "TrainResult",
    "adam_step",
    "ce_loss",
    "combined_loss",
    "jaccard_loss",
    "load_checkpoint",
    "mean_iou",
    "predict_probs",
    "prepare_split",
    "save_checkpoint",
    "train",
]
