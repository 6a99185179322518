"""Implementations of the command-line subcommands."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Optional

import numpy as np

from ..corpus import Dataset, FieldSchema, SynthConfig, load_dataset, split_kfold, synth_generate, write_dataset
from ..corpus.splits import FoldSplit
from ..embed import Embedder, EmbedderConfig, build_embedder
from ..exceptions import (
    IoFailureError,
    MalformedFileError,
    PipelineError,
    SchemaMismatchError,
)
from ..extract import FieldPrediction, decode_fields
from ..grid import GridEncoder, GridSpec, canonical_kind, create_encoder, rasterize_target_mask, write_tensor
from ..metrics import Report, evaluate_dataset
from ..net import ArchConfig, param_count
from ..objective import (
    Checkpoint,
    TrainConfig,
    TrainResult,
    load_checkpoint,
    mean_iou,
    predict_probs,
    prepare_split,
    save_checkpoint,
    train,
)
from ..settings import Settings, resolve_threads
from .manifest import RunManifest

logger = logging.getLogger(__name__)

TRAIN_FOLDS = 5

APPROACH_NAMES = {
    "layout": "Layout Only",
    "wordgrid": "WordGrid",
    "vwg_pad": "VisualWordGrid-pad",
    "vwg_2enc": "VisualWordGrid-2encoders",
}
TABLE_COLUMNS = ("Approach", "FAR", "WAR", "Inference Time", "#Parameters")


def _pick(value: Any, fallback: Any) -> Any:
    return fallback if value is None else value


def _mkdir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailureError(f"Unable to create {path}: {exc}") from exc
    return path


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailureError(f"Unable to write {path}: {exc}") from exc


def _write_json(path: Path, payload: Any) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _threads(args: argparse.Namespace, settings: Settings) -> int:
    return resolve_threads(_pick(args.threads, settings.runtime.threads))


def _snapshot(settings: Settings, args: argparse.Namespace) -> dict[str, Any]:
    options = {key: value for key, value in vars(args).items() if key != "handler" and value is not None}
    return {"settings": dataclasses.asdict(settings), "options": options}


def _grid_spec(args: argparse.Namespace, settings: Settings) -> GridSpec:
    height, width = args.grid if args.grid else (settings.grid.height, settings.grid.width)
    return GridSpec(H=height, W=width, d=_pick(args.dim, settings.embed.dim))


def _embedder(args: argparse.Namespace, settings: Settings, dim: int) -> Embedder:
    table = _pick(getattr(args, "embedding_table", None), settings.embed.table)
    config = EmbedderConfig(
        dim=dim,
        seed=settings.embed.seed,
        ngram_min=settings.embed.ngram_min,
        ngram_max=settings.embed.ngram_max,
        bucket_count=settings.embed.bucket_count,
        table_path=str(table) if table else None,
    )
    return build_embedder(config)


def _train_config(args: argparse.Namespace, settings: Settings, kind: str, seed: int, threads: int) -> TrainConfig:
    return TrainConfig(
        encoder_kind=kind,
        epochs=_pick(args.epochs, settings.train.epochs),
        batch_size=_pick(args.batch_size, settings.train.batch_size),
        lr=_pick(args.lr, settings.train.lr),
        patience=_pick(args.patience, settings.train.patience),
        seed=seed,
        loss=_pick(args.loss, settings.train.loss),
        threads=threads,
    )


def _arch(args: argparse.Namespace, settings: Settings, kind: str, spec: GridSpec, embedder: Embedder, schema: FieldSchema) -> ArchConfig:
    encoder = create_encoder(kind, spec, embedder)
    return encoder.arch_for(
        schema.num_classes,
        _pick(args.base_channels, settings.net.base_channels),
        _pick(args.depth, settings.net.depth),
    )


def cmd_synth(args: argparse.Namespace, settings: Settings) -> int:
    manifest = RunManifest(command="synth", config=_snapshot(settings, args))
    config = SynthConfig(
        num_docs=_pick(args.num, settings.synth.num_docs),
        variant=_pick(args.variant, settings.synth.variant),
        image_width=_pick(args.width, settings.synth.width),
        image_height=_pick(args.height, settings.synth.height),
        seed=_pick(args.seed, settings.synth.seed),
    )
    dataset = synth_generate(config, threads=_threads(args, settings))
    out_dir = _mkdir(Path(args.out))
    manifest_path = write_dataset(dataset, out_dir)
    manifest.seed = config.seed
    manifest.outputs = {"dataset": str(manifest_path)}
    manifest.finish(out_dir)
    return 0


def cmd_encode(args: argparse.Namespace, settings: Settings) -> int:
    manifest = RunManifest(command="encode", config=_snapshot(settings, args), inputs={"dataset": str(args.dataset)})
    threads = _threads(args, settings)
    dataset = load_dataset(Path(args.dataset), threads=threads)
    spec = _grid_spec(args, settings)
    encoder = create_encoder(args.encoder, spec, _embedder(args, settings, spec.d))
    out_dir = _mkdir(Path(args.out))
    failures = 0
    for ldoc in dataset:
        if encoder.needs_image and ldoc.document.image is None:
            failures += 1
            logger.error("Cannot encode %s with %s: the document has no image", ldoc.id, encoder.kind)
            continue
        encoded = encoder.encode(ldoc.document)
        write_tensor(out_dir / f"{ldoc.id}.main.vwgt", encoded.main)
        if encoded.aux is not None:
            write_tensor(out_dir / f"{ldoc.id}.aux.vwgt", encoded.aux)
        write_tensor(out_dir / f"{ldoc.id}.mask.vwgt", rasterize_target_mask(ldoc, spec).astype(np.float32))
    logger.info("Encoded %d of %d documents with %s", len(dataset) - failures, len(dataset), encoder.kind)
    manifest.outputs = {"tensors": str(out_dir)}
    manifest.finish(out_dir)
    return 1 if failures else 0


def _fit(
    args: argparse.Namespace,
    settings: Settings,
    dataset: Dataset,
    split: FoldSplit,
    kind: str,
    seed: int,
    threads: int,
) -> tuple[TrainResult, GridSpec, Embedder]:
    spec = _grid_spec(args, settings)
    embedder = _embedder(args, settings, spec.d)
    arch = _arch(args, settings, kind, spec, embedder, dataset.schema)
    result = train(dataset, split, arch, spec, embedder, _train_config(args, settings, kind, seed, threads))
    return result, spec, embedder


def cmd_train(args: argparse.Namespace, settings: Settings) -> int:
    seed = _pick(args.seed, settings.train.seed)
    manifest = RunManifest(
        command="train", config=_snapshot(settings, args), seed=seed, inputs={"dataset": str(args.dataset)}
    )
    threads = _threads(args, settings)
    dataset = load_dataset(Path(args.dataset), threads=threads)
    if args.overfit:
        everything = tuple(range(len(dataset)))
        split = FoldSplit(train=everything, validation=everything, test=())
    else:
        split = split_kfold(dataset, TRAIN_FOLDS, seed)[0]
    result, _, embedder = _fit(args, settings, dataset, split, canonical_kind(args.encoder), seed, threads)

    checkpoint = result.checkpoint
    encoder = create_encoder(checkpoint.encoder_kind, checkpoint.spec, embedder)
    train_set = prepare_split(dataset.subset(split.train), encoder, threads=threads)
    train_miou = mean_iou(checkpoint.params, checkpoint.arch, train_set, dataset.schema)
    checkpoint.metadata["train_miou"] = train_miou

    ckpt_path = Path(args.out)
    _mkdir(ckpt_path.parent)
    save_checkpoint(ckpt_path, checkpoint)
    history_path = Path(args.history) if args.history else ckpt_path.with_name(f"{ckpt_path.name}.history.json")
    _write_json(
        history_path,
        {
            "encoder_kind": checkpoint.encoder_kind,
            "best_epoch": checkpoint.metadata["epoch"],
            "best_val_miou": checkpoint.metadata["best_val_miou"],
            "train_miou": train_miou,
            "stopped_early": result.stopped_early,
            "epochs": result.history_json(),
        },
    )
    logger.info("Train mIoU of the best checkpoint: %.4f", train_miou)
    manifest.outputs = {"checkpoint": str(ckpt_path), "history": str(history_path)}
    manifest.finish(ckpt_path)
    return 0


def _predict_with(
    checkpoint: Checkpoint, encoder: GridEncoder, docs: list, *, threads: int
) -> list[FieldPrediction]:
    inputs = encoder.encode_many([ldoc.document for ldoc in docs], threads=threads)
    maps = predict_probs(checkpoint.params, checkpoint.arch, inputs)
    return [
        decode_fields(ldoc.document, probs, checkpoint.spec, checkpoint.schema) for ldoc, probs in zip(docs, maps)
    ]


def _predict(checkpoint: Checkpoint, dataset: Dataset, docs: list, *, threads: int) -> list[FieldPrediction]:
    if checkpoint.schema != dataset.schema:
        raise SchemaMismatchError(
            f"Checkpoint fields {checkpoint.schema.field_names} differ from dataset fields {dataset.schema.field_names}"
        )
    encoder = create_encoder(checkpoint.encoder_kind, checkpoint.spec, build_embedder(checkpoint.embedder))
    return _predict_with(checkpoint, encoder, docs, threads=threads)


def cmd_predict(args: argparse.Namespace, settings: Settings) -> int:
    manifest = RunManifest(
        command="predict",
        config=_snapshot(settings, args),
        inputs={"checkpoint": str(args.ckpt), "dataset": str(args.dataset)},
    )
    threads = _threads(args, settings)
    checkpoint = load_checkpoint(Path(args.ckpt))
    dataset = load_dataset(Path(args.dataset), threads=threads)
    out_dir = _mkdir(Path(args.out))
    predictions = _predict(checkpoint, dataset, list(dataset), threads=threads)
    for prediction in predictions:
        _write_json(out_dir / f"{prediction.doc_id}.json", prediction.to_json())
    logger.info("Wrote %d predictions to %s", len(predictions), out_dir)
    manifest.seed = checkpoint.metadata.get("train", {}).get("seed")
    manifest.outputs = {"predictions": str(out_dir)}
    manifest.finish(out_dir)
    return 0


def _read_prediction(path: Path) -> FieldPrediction:
    try:
        return FieldPrediction.from_json(json.loads(path.read_text(encoding="utf-8")))
    except OSError as exc:
        raise IoFailureError(f"Unable to read {path}: {exc}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as exc:
        raise MalformedFileError(f"{path} is not a valid prediction file: {exc}") from exc


def cmd_evaluate(args: argparse.Namespace, settings: Settings) -> int:
    manifest = RunManifest(
        command="evaluate",
        config=_snapshot(settings, args),
        inputs={"predictions": str(args.pred), "dataset": str(args.dataset)},
    )
    dataset = load_dataset(Path(args.dataset), threads=_threads(args, settings))
    pred_dir = Path(args.pred)
    predictions = {
        ldoc.id: _read_prediction(pred_dir / f"{ldoc.id}.json")
        for ldoc in dataset
        if (pred_dir / f"{ldoc.id}.json").is_file()
    }
    report = evaluate_dataset(list(dataset), predictions, dataset.schema)
    out_path = Path(args.out)
    _mkdir(out_path.parent)
    _write_json(out_path, report.to_json())
    manifest.outputs = {"report": str(out_path)}
    manifest.finish(out_path)
    return 0


def _format_table(rows: list[dict[str, Any]]) -> str:
    cells = [list(TABLE_COLUMNS)]
    for row in rows:
        cells.append(
            [
                row["approach"],
                f"{100 * row['far']:.1f}%",
                "n/a" if row["war"] is None else f"{100 * row['war']:.1f}%",
                f"{row['inference_time']:.4f}s",
                f"{row['parameters']:,}".replace(",", " "),
            ]
        )
    widths = [max(len(line[i]) for line in cells) for i in range(len(TABLE_COLUMNS))]
    return "\n".join(" | ".join(value.ljust(width) for value, width in zip(line, widths)) for line in cells) + "\n"


def _mean_of(values: list[Optional[float]]) -> Optional[float]:
    present = [value for value in values if value is not None]
    return float(np.mean(present)) if present else None


def cmd_kfold(args: argparse.Namespace, settings: Settings) -> int:
    seeds = args.seeds if args.seeds else [settings.train.seed]
    manifest = RunManifest(
        command="kfold", config=_snapshot(settings, args), seed=seeds[0], inputs={"dataset": str(args.dataset)}
    )
    threads = _threads(args, settings)
    dataset = load_dataset(Path(args.dataset), threads=threads)
    out_dir = _mkdir(Path(args.out))
    kinds = [canonical_kind(kind) for kind in args.encoders]

    rows: list[dict[str, Any]] = []
    runs: list[dict[str, Any]] = []
    for kind in kinds:
        reports: list[Report] = []
        timings: list[float] = []
        parameters = 0
        for seed in seeds:
            folds = split_kfold(dataset, args.k, seed)
            for fold_index, split in enumerate(folds[: args.folds or len(folds)]):
                result, _, embedder = _fit(args, settings, dataset, split, kind, seed, threads)
                checkpoint = result.checkpoint
                parameters = param_count(checkpoint.arch)
                test_docs = dataset.subset(split.test)
                encoder = create_encoder(checkpoint.encoder_kind, checkpoint.spec, embedder)
                # Untimed pass fills the embedder bucket cache with the test vocabulary.
                _predict_with(checkpoint, encoder, test_docs, threads=1)
                started = time.process_time()
                predictions = _predict_with(checkpoint, encoder, test_docs, threads=1)
                per_doc = (time.process_time() - started) / len(test_docs)
                report = evaluate_dataset(
                    test_docs, {prediction.doc_id: prediction for prediction in predictions}, dataset.schema
                )
                reports.append(report)
                timings.append(per_doc)
                runs.append(
                    {
                        "encoder": kind,
                        "seed": seed,
                        "fold": fold_index,
                        "war": report.war,
                        "far": report.far,
                        "best_val_miou": checkpoint.metadata["best_val_miou"],
                        "epochs_run": checkpoint.metadata["epochs_run"],
                        "inference_time": per_doc,
                    }
                )
                logger.info(
                    "%s seed=%d fold=%d: WAR=%s FAR=%.4f", kind, seed, fold_index, report.war, report.far
                )
        rows.append(
            {
                "encoder": kind,
                "approach": APPROACH_NAMES[kind],
                "far": float(np.mean([report.far for report in reports])),
                "war": _mean_of([report.war for report in reports]),
                "inference_time": float(np.mean(timings)),
                "parameters": parameters,
            }
        )

    table_path = out_dir / "ablation.json"
    _write_json(table_path, {"columns": list(TABLE_COLUMNS), "rows": rows, "runs": runs})
    table = _format_table(rows)
    _write_text(out_dir / "ablation.txt", table)
    sys.stdout.write(table)
    manifest.outputs = {"table": str(table_path)}
    manifest.finish(out_dir)
    return 0


def run_command(args: argparse.Namespace, settings: Settings) -> int:
    try:
        return args.handler(args, settings)
    except PipelineError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return 1

