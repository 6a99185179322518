"""Document model, file ingestion, synthetic generation and k-fold splits."""

from .ground_truth import derive_ground_truth
from .io import load_dataset, load_document, write_dataset
from .splits import FoldSplit, split_kfold
from .synth import synth_generate
from .types import (
    DEFAULT_FIELDS,
    Annotation,
    Dataset,
    Document,
    FieldSchema,
    LabeledDocument,
    Rect,
    RGBImage,
    SynthConfig,
    TokenBox,
)

__all__ = [
    "DEFAULT_FIELDS",
    "Annotation",
    "Dataset",
    "Document",
    "FieldSchema",
    "FoldSplit",
    "LabeledDocument",
    "Rect",
    "RGBImage",
    "SynthConfig",
    "TokenBox",
    "derive_ground_truth",
    "load_dataset",
    "load_document",
    "split_kfold",
    "synth_generate",
    "write_dataset",
]
