"""Mini-batch training with Adam and early stopping on validation mean IoU."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from ..corpus.splits import FoldSplit
from ..corpus.types import Dataset, FieldSchema, LabeledDocument
from ..embed import Embedder
from ..exceptions import ConfigError, EmptySplitError, NonFiniteLossError
from ..extract import argmax_mask
from ..grid.encoders import EncodedInput, GridEncoder, canonical_kind, create_encoder
from ..grid.raster import rasterize_target_mask
from ..grid.spec import GridSpec
from ..metrics import iou_metric
from ..net import ArchConfig, ParamSet, backward, forward, init_params, param_count
from ..rng import STREAM_SHUFFLE, Xoshiro256, derive_seed
from ..settings import LOSS_KINDS
from .adam import AdamState, adam_step
from .checkpoint import Checkpoint
from .losses import LossValue, ce_loss, combined_loss, jaccard_loss

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    encoder_kind: str
    epochs: int = 300
    batch_size: int = 8
    lr: float = 1e-3
    patience: int = 20
    seed: int = 0
    loss: str = "combined"
    threads: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "encoder_kind", canonical_kind(self.encoder_kind))
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.patience < 1:
            raise ConfigError("patience must be >= 1")
        if self.lr < 0:
            raise ConfigError("lr must be >= 0")
        if self.loss not in LOSS_KINDS:
            raise ConfigError(f"loss must be one of {', '.join(LOSS_KINDS)}")

    def to_json(self) -> dict[str, Any]:
        return {
            "encoder_kind": self.encoder_kind,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "lr": self.lr,
            "patience": self.patience,
            "seed": self.seed,
            "loss": self.loss,
        }


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    ce: float
    jaccard: float
    val_miou: float

    def to_json(self) -> dict[str, Any]:
        return {
            "epoch": self.epoch,
            "train_loss": self.train_loss,
            "ce": self.ce,
            "jaccard": self.jaccard,
            "val_miou": self.val_miou,
        }


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    history: list[EpochRecord] = field(default_factory=list)
    stopped_early: bool = False

    def history_json(self) -> list[dict[str, Any]]:
        return [record.to_json() for record in self.history]


@dataclass(frozen=True)
class PreparedSplit:
    """Encoded inputs and target masks of a document list, in order."""

    inputs: list[EncodedInput]
    masks: list[np.ndarray]

    def __len__(self) -> int:
        return len(self.inputs)


def prepare_split(docs: Sequence[LabeledDocument], encoder: GridEncoder, *, threads: int = 1) -> PreparedSplit:
    inputs = encoder.encode_many([ldoc.document for ldoc in docs], threads=threads)
    masks = [rasterize_target_mask(ldoc, encoder.spec) for ldoc in docs]
    return PreparedSplit(inputs=inputs, masks=masks)


def _stack(inputs: Sequence[EncodedInput]) -> tuple[np.ndarray, Optional[np.ndarray]]:
    main = np.stack([item.main for item in inputs])
    aux = np.stack([item.aux for item in inputs]) if inputs[0].aux is not None else None
    return main, aux


def predict_probs(
    params: ParamSet, arch: ArchConfig, inputs: Sequence[EncodedInput], *, batch_size: int = 8
) -> list[np.ndarray]:
    """Probability maps for ``inputs``, evaluated ``batch_size`` documents at a time."""

    maps: list[np.ndarray] = []
    for start in range(0, len(inputs), batch_size):
        main, aux = _stack(inputs[start : start + batch_size])
        probs, _ = forward(params, arch, main, aux)
        maps.extend(probs)
    return maps


def mean_iou(
    params: ParamSet, arch: ArchConfig, prepared: PreparedSplit, schema: FieldSchema, *, batch_size: int = 8
) -> float:
    maps = predict_probs(params, arch, prepared.inputs, batch_size=batch_size)
    return float(np.mean([iou_metric(argmax_mask(probs), mask, schema) for probs, mask in zip(maps, prepared.masks)]))


def _sample_loss(
    probs: np.ndarray, mask: np.ndarray, schema: FieldSchema, kind: str
) -> tuple[LossValue, float, np.ndarray]:
    if kind == "ce":
        ce, grad = ce_loss(probs, mask)
        jaccard, _ = jaccard_loss(probs, mask, schema)
        return LossValue(ce=ce, jaccard=jaccard), ce, grad
    value, grad = combined_loss(probs, mask, schema)
    return value, value.total, grad


def _check_arch(encoder: GridEncoder, arch: ArchConfig, schema: FieldSchema) -> None:
    if arch.num_classes != schema.num_classes:
        raise ConfigError(f"Architecture predicts {arch.num_classes} classes, schema has {schema.num_classes}")
    expected = encoder.arch_for(arch.num_classes, arch.base_channels, arch.depth)
    if expected != arch:
        raise ConfigError(f"Encoder {encoder.kind!r} does not produce inputs for this architecture")


def train(
    dataset: Dataset,
    split: FoldSplit,
    arch: ArchConfig,
    spec: GridSpec,
    embedder: Embedder,
    config: TrainConfig,
) -> TrainResult:
    """Train from a seeded initialisation and return the best-validation checkpoint."""

    if not split.train:
        raise EmptySplitError("Training split is empty")
    if not split.validation:
        raise EmptySplitError("Validation split is empty")
    schema = dataset.schema
    encoder = create_encoder(config.encoder_kind, spec, embedder)
    _check_arch(encoder, arch, schema)

    train_set = prepare_split(dataset.subset(split.train), encoder, threads=config.threads)
    val_set = prepare_split(dataset.subset(split.validation), encoder, threads=config.threads)
    logger.info(
        "Training %s on %d documents (validation %d), %d parameters",
        config.encoder_kind,
        len(train_set),
        len(val_set),
        param_count(arch),
    )

    params = init_params(arch, config.seed)
    state = AdamState.zeros(params, lr=config.lr)
    shuffler = Xoshiro256(derive_seed(config.seed, STREAM_SHUFFLE))
    best_params = {name: value.copy() for name, value in params.items()}
    best_miou = -1.0
    best_epoch = 0
    waited = 0
    history: list[EpochRecord] = []
    stopped_early = False
    started = time.perf_counter()

    for epoch in range(1, config.epochs + 1):
        order = list(range(len(train_set)))
        shuffler.shuffle(order)
        totals = np.zeros(3)
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            main, aux = _stack([train_set.inputs[i] for i in batch])
            probs, cache = forward(params, arch, main, aux)
            grad_logits = np.empty_like(probs)
            for position, index in enumerate(batch):
                value, objective, grad = _sample_loss(probs[position], train_set.masks[index], schema, config.loss)
                if not np.isfinite(objective):
                    raise NonFiniteLossError(f"Loss became {objective} at epoch {epoch}")
                totals += (objective, value.ce, value.jaccard)
                grad_logits[position] = grad / len(batch)
            grads = backward(params, arch, cache, grad_logits)
            state, params = adam_step(state, params, grads)

        train_loss, ce, jaccard = (totals / len(train_set)).tolist()
        val_miou = mean_iou(params, arch, val_set, schema, batch_size=config.batch_size)
        history.append(EpochRecord(epoch=epoch, train_loss=train_loss, ce=ce, jaccard=jaccard, val_miou=val_miou))
        logger.info("epoch %d loss=%.5f ce=%.5f jaccard=%.5f val_miou=%.4f", epoch, train_loss, ce, jaccard, val_miou)

        if val_miou > best_miou:
            best_miou, best_epoch, waited = val_miou, epoch, 0
            best_params = {name: value.copy() for name, value in params.items()}
        else:
            waited += 1
            if waited >= config.patience:
                stopped_early = True
                logger.info("Early stop at epoch %d; best val_miou %.4f at epoch %d", epoch, best_miou, best_epoch)
                break

    metadata = {
        "encoder_kind": config.encoder_kind,
        "epoch": best_epoch,
        "best_val_miou": best_miou,
        "epochs_run": len(history),
        "train": config.to_json(),
    }
    logger.info("Training finished in %.1fs", time.perf_counter() - started)
    checkpoint = Checkpoint(
        arch=arch, schema=schema, spec=spec, embedder=embedder.config, params=best_params, metadata=metadata
    )
    return TrainResult(checkpoint=checkpoint, history=history, stopped_early=stopped_early)
