"""Custom exceptions used across the extraction pipeline."""

from __future__ import annotations

from typing import Optional


class PipelineError(RuntimeError):
    """Base class for every error the pipeline reports to its callers."""


class ConfigError(PipelineError):
    """Raised when the configuration file or a command option is invalid."""


class MalformedFileError(PipelineError):
    """Raised when an OCR, annotation, manifest or image file violates its format."""


class BoxOutOfBoundsError(PipelineError):
    """Raised when a token box or annotation region leaves the page image."""


class UnknownFieldError(PipelineError):
    """Raised when an annotation names a field missing from the schema."""


class DatasetTooSmallError(PipelineError):
    """Raised when a dataset cannot be split into the requested folds."""


class DimensionMismatchError(PipelineError):
    """Raised when an embedding table does not have the expected dimension."""


class MalformedLineError(PipelineError):
    """Raised when a line of an embedding table cannot be parsed."""

    def __init__(self, line_number: int, detail: Optional[str] = None) -> None:
        message = f"Malformed embedding table line {line_number}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)
        self.line_number = line_number


class MissingImageError(PipelineError):
    """Raised when a visual encoding is requested for a document without image."""


class IoFailureError(PipelineError):
    """Raised when a tensor or checkpoint file cannot be read or written."""


class BadMagicError(PipelineError):
    """Raised when a binary file does not start with the expected magic bytes."""


class ShapeOverflowError(PipelineError):
    """Raised when a tensor shape cannot be represented in the file format."""


class ShapeMismatchError(PipelineError):
    """Raised when tensor shapes disagree with each other or with the architecture."""


class VersionMismatchError(PipelineError):
    """Raised when a checkpoint was written by an unsupported format version."""


class NonFiniteGradientError(PipelineError):
    """Raised when an optimizer step receives NaN or infinite gradients."""


class NonFiniteLossError(PipelineError):
    """Raised when training produces a NaN or infinite loss."""


class EmptySplitError(PipelineError):
    """Raised when training is started without training or validation documents."""


class NoEvaluableFieldsError(PipelineError):
    """Raised when every ground-truth field of a document is empty."""


class MissingPredictionError(PipelineError):
    """Raised when a document has no prediction to evaluate."""


class SchemaMismatchError(PipelineError):
    """Raised when a checkpoint and a dataset disagree on the field schema."""
