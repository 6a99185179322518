"""Token edit distance, WAR, FAR, pixel IoU and dataset reports."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from .corpus.types import FieldSchema, LabeledDocument
from .embed import normalize_token
from .exceptions import MissingPredictionError, NoEvaluableFieldsError, ShapeMismatchError
from .extract import FieldPrediction

logger = logging.getLogger(__name__)

TokenFields = Mapping[str, Sequence[str]]


@dataclass(frozen=True)
class EditCounts:
    insertions: int = 0
    deletions: int = 0
    substitutions: int = 0

    @property
    def total(self) -> int:
        return self.insertions + self.deletions + self.substitutions


def token_edit_distance(gt: Sequence[str], pred: Sequence[str]) -> EditCounts:
    """Unit-cost Levenshtein alignment of ``pred`` against ``gt``.

    Tokens present only in ``pred`` count as insertions, tokens missing from
    ``pred`` as deletions. The traceback takes the diagonal whenever it lies on
    a minimal path, so substitutions are preferred over insert/delete pairs.
    """

    n, m = len(gt), len(pred)
    cost = np.zeros((n + 1, m + 1), dtype=np.int64)
    cost[:, 0] = np.arange(n + 1)
    cost[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            mismatch = int(gt[i - 1] != pred[j - 1])
            cost[i, j] = min(cost[i - 1, j - 1] + mismatch, cost[i - 1, j] + 1, cost[i, j - 1] + 1)

    insertions = deletions = substitutions = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and cost[i, j] == cost[i - 1, j - 1] + int(gt[i - 1] != pred[j - 1]):
            substitutions += int(gt[i - 1] != pred[j - 1])
            i, j = i - 1, j - 1
        elif i > 0 and cost[i, j] == cost[i - 1, j] + 1:
            deletions += 1
            i -= 1
        else:
            insertions += 1
            j -= 1
    return EditCounts(insertions=insertions, deletions=deletions, substitutions=substitutions)


@dataclass(frozen=True)
class WarResult:
    per_field: dict[str, float]

    @property
    def mean(self) -> float:
        return float(np.mean(list(self.per_field.values())))


def war(gt_fields: TokenFields, pred_fields: TokenFields) -> WarResult:
    """Word accuracy rate per field with non-empty ground truth; never clamped."""

    per_field: dict[str, float] = {}
    for name, gt_tokens in gt_fields.items():
        if not gt_tokens:
            continue
        counts = token_edit_distance(list(gt_tokens), list(pred_fields.get(name, ())))
        per_field[name] = 1.0 - counts.total / len(gt_tokens)
    if not per_field:
        raise NoEvaluableFieldsError("Every ground-truth field is empty")
    return WarResult(per_field=per_field)


def field_matches(gt_fields: TokenFields, pred_fields: TokenFields) -> dict[str, bool]:
    return {name: " ".join(gt) == " ".join(pred_fields.get(name, ())) for name, gt in gt_fields.items()}


def far(gt_fields: TokenFields, pred_fields: TokenFields) -> float:
    """Fraction of schema fields whose joined strings match exactly."""

    matches = field_matches(gt_fields, pred_fields)
    return sum(matches.values()) / len(matches)


def iou_metric(pred: np.ndarray, gt: np.ndarray, schema: FieldSchema) -> float:
    """Mean foreground IoU over classes present in either mask; 1.0 when none is."""

    if pred.shape != gt.shape:
        raise ShapeMismatchError(f"Prediction mask {pred.shape} does not match ground truth {gt.shape}")
    scores = []
    for cls in range(1, schema.num_classes):
        p, g = pred == cls, gt == cls
        union = int(np.count_nonzero(p | g))
        if union:
            scores.append(np.count_nonzero(p & g) / union)
    return float(np.mean(scores)) if scores else 1.0


def ground_truth_tokens(ldoc: LabeledDocument, schema: FieldSchema) -> dict[str, list[str]]:
    texts = {token.index: normalize_token(token.text) for token in ldoc.document.tokens}
    return {
        name: " ".join(texts[i] for i in indices).split()
        for name, indices in ldoc.field_token_indices(schema).items()
    }


@dataclass(frozen=True)
class DocScores:
    doc_id: str
    field_war: dict[str, float]
    field_match: dict[str, bool]
    far: float

    @property
    def fields_evaluated(self) -> int:
        return len(self.field_war)

    @property
    def war(self) -> Optional[float]:
        return float(np.mean(list(self.field_war.values()))) if self.field_war else None

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.doc_id,
            "war": self.war,
            "far": self.far,
            "fields_evaluated": self.fields_evaluated,
            "field_war": self.field_war,
            "field_match": self.field_match,
        }


def score_document(ldoc: LabeledDocument, prediction: FieldPrediction, schema: FieldSchema) -> DocScores:
    gt_fields = ground_truth_tokens(ldoc, schema)
    pred_fields = {name: prediction.fields[name].text.split() for name in schema.field_names if name in prediction.fields}
    try:
        field_war = war(gt_fields, pred_fields).per_field
    except NoEvaluableFieldsError:
        field_war = {}
    return DocScores(
        doc_id=ldoc.id,
        field_war=field_war,
        field_match=field_matches(gt_fields, pred_fields),
        far=far(gt_fields, pred_fields),
    )


def _mean(values: Sequence[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


@dataclass
class Report:
    war: Optional[float]
    far: float
    per_field: dict[str, dict[str, Any]]
    per_doc: list[DocScores]
    extras: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        dataset: dict[str, Any] = {"war": self.war, "far": self.far, "documents": len(self.per_doc)}
        dataset.update(self.extras)
        return {
            "dataset": dataset,
            "per_field": self.per_field,
            "per_doc": [scores.to_json() for scores in self.per_doc],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Report":
        dataset = dict(data["dataset"])
        per_doc = [
            DocScores(
                doc_id=str(entry["id"]),
                field_war={str(k): float(v) for k, v in entry.get("field_war", {}).items()},
                field_match={str(k): bool(v) for k, v in entry.get("field_match", {}).items()},
                far=float(entry["far"]),
            )
            for entry in data["per_doc"]
        ]
        war_value = dataset.pop("war")
        far_value = dataset.pop("far")
        dataset.pop("documents", None)
        return cls(
            war=None if war_value is None else float(war_value),
            far=float(far_value),
            per_field={str(name): dict(values) for name, values in data["per_field"].items()},
            per_doc=per_doc,
            extras=dataset,
        )


def evaluate_dataset(
    docs: Sequence[LabeledDocument], predictions: Mapping[str, FieldPrediction], schema: FieldSchema
) -> Report:
    """Score every document against its prediction, keyed by document id."""

    if not docs:
        raise MissingPredictionError("No documents to evaluate")
    missing = [ldoc.id for ldoc in docs if ldoc.id not in predictions]
    if missing:
        raise MissingPredictionError(f"No prediction for document(s): {', '.join(missing)}")
    per_doc = [score_document(ldoc, predictions[ldoc.id], schema) for ldoc in docs]

    per_field: dict[str, dict[str, Any]] = {}
    for name in schema.field_names:
        field_wars = [scores.field_war[name] for scores in per_doc if name in scores.field_war]
        per_field[name] = {
            "war": _mean(field_wars),
            "far": float(np.mean([scores.field_match[name] for scores in per_doc])),
            "evaluated": len(field_wars),
        }
    doc_wars = [scores.war for scores in per_doc if scores.war is not None]
    report = Report(
        war=_mean(doc_wars),
        far=float(np.mean([scores.far for scores in per_doc])),
        per_field=per_field,
        per_doc=per_doc,
    )
    logger.info("Evaluated %d documents: WAR=%s FAR=%.4f", len(per_doc), report.war, report.far)
    return report
