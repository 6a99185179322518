"""Command-line entry point: ``python -m visualwordgrid <command>``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from .. import __version__
from ..exceptions import PipelineError
from ..settings import ENCODER_KINDS, LOG_LEVEL_ENV, LOSS_KINDS, SYNTH_VARIANTS, load_settings
from . import commands

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

logger = logging.getLogger(__name__)


def _positive_int(raw: str) -> int:
    try:
        value = int(raw)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer, got {raw!r}") from exc
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _non_negative_int(raw: str) -> int:
    try:
        value = int(raw)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer, got {raw!r}") from exc
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def _grid(raw: str) -> tuple[int, int]:
    """Parse ``HxW`` into ``(H, W)``."""

    parts = raw.lower().split("x")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected HxW, got {raw!r}")
    return _positive_int(parts[0]), _positive_int(parts[1])


def _encoder(raw: str) -> str:
    kind = raw.strip().lower().replace("-", "_")
    if kind not in ENCODER_KINDS:
        raise argparse.ArgumentTypeError(f"unknown encoder {raw!r}")
    return kind


def _encoder_list(raw: str) -> list[str]:
    return [_encoder(item) for item in raw.split(",") if item.strip()]


def _seed_list(raw: str) -> list[int]:
    return [_non_negative_int(item) for item in raw.split(",") if item.strip()]


def _add_grid_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid", type=_grid, help="Grid size as HxW (default from configuration).")
    parser.add_argument("--dim", type=_positive_int, help="Token embedding dimension.")
    parser.add_argument("--embedding-table", type=Path, help="word2vec-style text table of pretrained embeddings.")


def _add_training_options(parser: argparse.ArgumentParser) -> None:
    _add_grid_options(parser)
    parser.add_argument("--epochs", type=_positive_int)
    parser.add_argument("--batch-size", type=_positive_int)
    parser.add_argument("--lr", type=float)
    parser.add_argument("--patience", type=_positive_int)
    parser.add_argument("--loss", choices=LOSS_KINDS, help="combined = cross-entropy + soft Jaccard.")
    parser.add_argument("--base-channels", type=_positive_int)
    parser.add_argument("--depth", type=_positive_int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="visualwordgrid",
        description="Encode documents as grids, train the segmentation network and score field extraction.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", type=Path, help="YAML configuration file.")
    parser.add_argument("--log-level", help=f"Logging level (default: config or {LOG_LEVEL_ENV}).")
    parser.add_argument("--threads", type=_positive_int, help="Worker threads (default: VWG_THREADS or all cores).")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="Generate a deterministic synthetic dataset.")
    synth.add_argument("--out", required=True, type=Path)
    synth.add_argument("--num", type=_positive_int)
    synth.add_argument("--variant", choices=SYNTH_VARIANTS)
    synth.add_argument("--seed", type=_non_negative_int)
    synth.add_argument("--width", type=_positive_int)
    synth.add_argument("--height", type=_positive_int)
    synth.set_defaults(handler=commands.cmd_synth)

    encode = sub.add_parser("encode", help="Write grid tensors and target masks for a dataset.")
    encode.add_argument("--dataset", required=True, type=Path)
    encode.add_argument("--encoder", required=True, type=_encoder)
    encode.add_argument("--out", required=True, type=Path)
    _add_grid_options(encode)
    encode.set_defaults(handler=commands.cmd_encode)

    train = sub.add_parser("train", help="Train one encoder on the first seeded 80/10/10 split.")
    train.add_argument("--dataset", required=True, type=Path)
    train.add_argument("--encoder", required=True, type=_encoder)
    train.add_argument("--out", required=True, type=Path, help="Checkpoint path.")
    train.add_argument("--seed", type=_non_negative_int)
    train.add_argument("--history", type=Path, help="History JSON path (default: <out>.history.json).")
    train.add_argument(
        "--overfit", action="store_true", help="Train and validate on every document instead of a split."
    )
    _add_training_options(train)
    train.set_defaults(handler=commands.cmd_train)

    predict = sub.add_parser("predict", help="Decode fields for every document of a dataset.")
    predict.add_argument("--ckpt", required=True, type=Path)
    predict.add_argument("--dataset", required=True, type=Path)
    predict.add_argument("--out", required=True, type=Path)
    predict.set_defaults(handler=commands.cmd_predict)

    evaluate = sub.add_parser("evaluate", help="Score predictions with WAR and FAR.")
    evaluate.add_argument("--pred", required=True, type=Path)
    evaluate.add_argument("--dataset", required=True, type=Path)
    evaluate.add_argument("--out", required=True, type=Path)
    evaluate.set_defaults(handler=commands.cmd_evaluate)

    kfold = sub.add_parser("kfold", help="Cross-validated comparison of encoders.")
    kfold.add_argument("--dataset", required=True, type=Path)
    kfold.add_argument("--encoders", required=True, type=_encoder_list, help="Comma-separated encoder names.")
    kfold.add_argument("--k", type=_positive_int, default=5)
    kfold.add_argument("--seeds", type=_seed_list, help="Comma-separated seeds (default: train.seed).")
    kfold.add_argument("--folds", type=_positive_int, help="Run only the first N folds of each seed.")
    kfold.add_argument("--out", required=True, type=Path)
    _add_training_options(kfold)
    kfold.set_defaults(handler=commands.cmd_kfold)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    try:
        settings = load_settings(args.config)
    except PipelineError as exc:
        sys.stderr.write(f"visualwordgrid: {exc}\n")
        return 1
    level = (args.log_level or os.getenv(LOG_LEVEL_ENV) or settings.runtime.log_level).upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT)
    logging.getLogger().setLevel(getattr(logging, level, logging.INFO))
    logger.debug("Running %s", args.command)
    return commands.run_command(args, settings)


__all__ = ["build_parser", "main"]
