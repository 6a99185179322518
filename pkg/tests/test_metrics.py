import itertools
import json
from functools import lru_cache

import numpy as np
import pytest

from conftest import build_document, label
from visualwordgrid.corpus import FieldSchema, Rect
from visualwordgrid.exceptions import MissingPredictionError, NoEvaluableFieldsError, ShapeMismatchError
from visualwordgrid.extract import FieldPrediction, FieldValue
from visualwordgrid.metrics import (
    Report,
    evaluate_dataset,
    far,
    iou_metric,
    token_edit_distance,
    war,
)


@lru_cache(maxsize=None)
def _levenshtein(a, b):
    if not a:
        return len(b)
    if not b:
        return len(a)
    return min(
        _levenshtein(a[1:], b[1:]) + (a[0] != b[0]),
        _levenshtein(a[1:], b) + 1,
        _levenshtein(a, b[1:]) + 1,
    )


def test_edit_distance_examples():
    identical = token_edit_distance(["a", "b", "c"], ["a", "b", "c"])
    assert identical.total == 0

    substitution = token_edit_distance(["a", "b", "c"], ["a", "x", "c"])
    assert (substitution.substitutions, substitution.insertions, substitution.deletions) == (1, 0, 0)

    deletion = token_edit_distance(["a", "b", "c"], ["a", "c"])
    assert (deletion.deletions, deletion.total) == (1, 1)

    insertion = token_edit_distance(["a"], ["a", "b", "c"])
    assert (insertion.insertions, insertion.total) == (2, 2)

    assert token_edit_distance([], ["a", "b"]).insertions == 2
    assert token_edit_distance(["a", "b"], []).deletions == 2


def test_edit_distance_matches_recursive_definition():
    alphabet = "abc"
    for total_length in range(9):
        for n in range(total_length + 1):
            for gt in itertools.product(alphabet, repeat=n):
                for pred in itertools.product(alphabet, repeat=total_length - n):
                    counts = token_edit_distance(gt, pred)
                    assert counts.total == _levenshtein(gt, pred)
                    assert counts.insertions - counts.deletions == len(pred) - len(gt)


def test_edit_distance_properties():
    rng = np.random.default_rng(5)

    def sample():
        return [str(v) for v in rng.integers(0, 4, rng.integers(0, 7))]

    for _ in range(200):
        a, b, c = sample(), sample(), sample()
        assert token_edit_distance(a, b).total == token_edit_distance(b, a).total
        assert token_edit_distance(a, a).total == 0
        assert token_edit_distance(a, c).total <= token_edit_distance(a, b).total + token_edit_distance(b, c).total


def test_war_examples():
    assert war({"total": ["a", "b", "c"]}, {"total": ["a", "x", "c"]}).mean == pytest.approx(2 / 3)
    assert war({"total": ["a", "b"]}, {"total": ["x", "y", "z"]}).mean == pytest.approx(-0.5)
    assert war({"total": ["a", "b"]}, {}).mean == pytest.approx(0.0)


def test_war_skips_empty_ground_truth():
    result = war({"total": ["a"], "supplier": []}, {"total": ["a"], "supplier": ["x"]})
    assert result.per_field == {"total": 1.0}

    with pytest.raises(NoEvaluableFieldsError):
        war({"total": [], "supplier": []}, {"total": ["a"]})


def test_far_examples():
    gt = {"a": ["x"], "b": ["y", "z"], "c": [], "d": ["w"]}
    assert far(gt, {"a": ["x"], "b": ["y", "z"], "c": [], "d": ["w"]}) == 1.0
    assert far(gt, {"a": ["x"], "b": ["y", "q"], "c": [], "d": ["w"]}) == 0.75
    assert far(gt, {"a": ["x"], "b": ["y", "z"], "c": ["extra"], "d": ["w"]}) == 0.75
    assert far(gt, {}) == 0.25


def test_iou_examples():
    schema = FieldSchema(("total",))
    gt = np.array([[1, 1, 1, 1, 0, 0]])
    pred = np.array([[0, 0, 1, 1, 1, 1]])
    assert iou_metric(pred, gt, schema) == pytest.approx(2 / 6)
    assert iou_metric(gt, gt, schema) == 1.0
    assert iou_metric(np.zeros((2, 3)), np.zeros((2, 3)), schema) == 1.0

    with pytest.raises(ShapeMismatchError):
        iou_metric(np.zeros((2, 3)), np.zeros((3, 2)), schema)


def test_iou_averages_classes_present():
    schema = FieldSchema(("a", "b", "c"))
    gt = np.array([[1, 1, 2, 0]])
    pred = np.array([[1, 1, 0, 0]])
    assert iou_metric(pred, gt, schema) == pytest.approx(0.5)


SCHEMA = FieldSchema(("supplier", "total"))


def _labeled(doc_id):
    document = build_document([("ACME", 0, 0, 16, 8), ("42.00", 32, 32, 16, 8)], doc_id=doc_id)
    return label(document, SCHEMA, {"supplier": [Rect(0, 0, 16, 8)], "total": [Rect(32, 32, 16, 8)]})


def _prediction(doc_id, supplier, total):
    return FieldPrediction(
        doc_id=doc_id,
        fields={"supplier": FieldValue((0,), supplier), "total": FieldValue((1,), total)},
    )


def test_evaluate_dataset_averages_documents():
    docs = [_labeled("one"), _labeled("two")]
    predictions = {
        "one": _prediction("one", "acme", "42.00"),
        "two": _prediction("two", "acme", "43.00"),
    }

    report = evaluate_dataset(docs, predictions, SCHEMA)

    assert report.far == pytest.approx(0.75)
    assert report.war == pytest.approx(0.75)
    assert report.per_field["total"] == {"war": 0.5, "far": 0.5, "evaluated": 2}
    assert report.per_field["supplier"]["far"] == 1.0
    assert [scores.doc_id for scores in report.per_doc] == ["one", "two"]
    assert report.per_doc[1].field_match == {"supplier": True, "total": False}


def test_report_json_round_trip():
    docs = [_labeled("one"), _labeled("two")]
    predictions = {"one": _prediction("one", "acme", "42.00"), "two": _prediction("two", "", "")}
    report = evaluate_dataset(docs, predictions, SCHEMA)
    report.extras["encoder"] = "vwg_pad"

    data = json.loads(json.dumps(report.to_json()))
    assert data["dataset"]["documents"] == 2
    assert data["dataset"]["encoder"] == "vwg_pad"
    assert Report.from_json(data).to_json() == report.to_json()


def test_missing_prediction():
    with pytest.raises(MissingPredictionError):
        evaluate_dataset([_labeled("one"), _labeled("two")], {"one": _prediction("one", "acme", "42.00")}, SCHEMA)
    with pytest.raises(MissingPredictionError):
        evaluate_dataset([], {}, SCHEMA)


def test_document_without_ground_truth_fields():
    schema = FieldSchema(("supplier",))
    ldoc = label(build_document([("hello", 0, 0, 8, 8)], doc_id="blank"), schema)
    prediction = FieldPrediction(doc_id="blank", fields={"supplier": FieldValue((), "")})

    report = evaluate_dataset([ldoc], {"blank": prediction}, schema)

    assert report.war is None
    assert report.far == 1.0
    assert report.per_doc[0].fields_evaluated == 0
    assert report.per_field["supplier"] == {"war": None, "far": 1.0, "evaluated": 0}
