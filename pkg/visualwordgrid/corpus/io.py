"""Reading and writing OCR, annotation, image and manifest files."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Optional

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..exceptions import IoFailureError, MalformedFileError
from ..settings import resolve_threads
from .ground_truth import derive_ground_truth
from .types import Annotation, Dataset, Document, FieldSchema, LabeledDocument, Rect, RGBImage, TokenBox

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
DOCS_DIRNAME = "docs"


def _read_json(path: Path) -> Any:
    try:
        raw_text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailureError(f"Unable to read {path}: {exc}") from exc
    try:
        return json.loads(raw_text)
    except json.JSONDecodeError as exc:
        raise MalformedFileError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc


def _write_json(path: Path, payload: Any) -> None:
    try:
        Path(path).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailureError(f"Unable to write {path}: {exc}") from exc


def _require_int(data: dict, key: str, *, where: str, path: Path) -> int:
    value = data.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise MalformedFileError(f"{path}: {where}.{key} must be an integer, got {value!r}")
    return value


def _parse_rect(data: object, *, where: str, path: Path) -> Rect:
    if not isinstance(data, dict):
        raise MalformedFileError(f"{path}: {where} must be an object")
    return Rect(
        x=_require_int(data, "x", where=where, path=path),
        y=_require_int(data, "y", where=where, path=path),
        w=_require_int(data, "w", where=where, path=path),
        h=_require_int(data, "h", where=where, path=path),
    )


def parse_ocr(path: Path) -> tuple[int, int, list[TokenBox]]:
    """Return ``(width, height, tokens)`` from an OCR JSON file."""

    data = _read_json(path)
    if not isinstance(data, dict):
        raise MalformedFileError(f"{path}: OCR root must be an object")
    width = _require_int(data, "width", where="ocr", path=path)
    height = _require_int(data, "height", where="ocr", path=path)
    raw_tokens = data.get("tokens")
    if not isinstance(raw_tokens, list):
        raise MalformedFileError(f"{path}: ocr.tokens must be a list")
    tokens: list[TokenBox] = []
    for index, raw in enumerate(raw_tokens):
        where = f"tokens[{index}]"
        rect = _parse_rect(raw, where=where, path=path)
        text = raw.get("text")
        if not isinstance(text, str) or not text.strip():
            raise MalformedFileError(f"{path}: {where}.text must be a non-empty string")
        tokens.append(TokenBox(index=index, text=text, x=rect.x, y=rect.y, w=rect.w, h=rect.h))
    return width, height, tokens


def parse_annotation(path: Path) -> dict[str, tuple[Rect, ...]]:
    data = _read_json(path)
    if not isinstance(data, dict) or not isinstance(data.get("fields"), dict):
        raise MalformedFileError(f"{path}: annotation must be an object with a 'fields' mapping")
    regions: dict[str, tuple[Rect, ...]] = {}
    for name, raw_rects in data["fields"].items():
        if not isinstance(raw_rects, list):
            raise MalformedFileError(f"{path}: fields.{name} must be a list of rectangles")
        regions[name] = tuple(
            _parse_rect(raw, where=f"fields.{name}[{i}]", path=path) for i, raw in enumerate(raw_rects)
        )
    return regions


def read_ppm(path: Path) -> RGBImage:
    """Load a binary (P6) 8-bit RGB PPM image."""

    try:
        with open(path, "rb") as handle:
            magic = handle.read(2)
    except OSError as exc:
        raise IoFailureError(f"Unable to read {path}: {exc}") from exc
    if magic != b"P6":
        raise MalformedFileError(f"{path}: expected a binary P6 PPM image")
    try:
        with Image.open(path) as image:
            image.load()
            if image.mode != "RGB":
                raise MalformedFileError(f"{path}: expected 8-bit RGB, got mode {image.mode}")
            pixels = np.asarray(image, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise MalformedFileError(f"{path}: unreadable PPM image ({exc})") from exc
    height, width = pixels.shape[:2]
    return RGBImage(width=width, height=height, pixels=pixels)


def write_ppm(path: Path, image: RGBImage) -> None:
    try:
        Image.fromarray(np.ascontiguousarray(image.pixels)).save(path, format="PPM")
    except OSError as exc:
        raise IoFailureError(f"Unable to write {path}: {exc}") from exc


def load_document(
    ocr_path: Path,
    image_path: Optional[Path],
    annotation_path: Optional[Path],
    schema: FieldSchema,
    *,
    doc_id: Optional[str] = None,
) -> LabeledDocument:
    """Load and validate one page; without annotation every token is background."""

    ocr_path = Path(ocr_path)
    width, height, tokens = parse_ocr(ocr_path)
    image = read_ppm(Path(image_path)) if image_path is not None else None
    identifier = doc_id or ocr_path.name.split(".")[0]
    document = Document(id=identifier, width=width, height=height, tokens=tuple(tokens), image=image)
    if annotation_path is None:
        annotation = Annotation.empty(schema)
    else:
        regions = parse_annotation(Path(annotation_path))
        for name in schema.field_names:
            regions.setdefault(name, ())
        annotation = Annotation(regions)
    gt_assignment = derive_ground_truth(document, annotation, schema)
    return LabeledDocument(document=document, annotation=annotation, gt_assignment=gt_assignment)


def load_dataset(manifest_path: Path, *, threads: int = 0) -> Dataset:
    """Load every document listed in a dataset manifest."""

    manifest_path = Path(manifest_path)
    data = _read_json(manifest_path)
    if not isinstance(data, dict):
        raise MalformedFileError(f"{manifest_path}: manifest root must be an object")
    schema = FieldSchema.from_json(data.get("schema"))
    entries = data.get("documents")
    if not isinstance(entries, list):
        raise MalformedFileError(f"{manifest_path}: manifest.documents must be a list")
    base = manifest_path.parent

    def _optional_path(entry: dict, key: str, where: str) -> Optional[Path]:
        value = entry.get(key)
        if value is None:
            return None
        if not isinstance(value, str):
            raise MalformedFileError(f"{manifest_path}: {where}.{key} must be a path string or null")
        return base / value

    jobs = []
    for index, entry in enumerate(entries):
        where = f"documents[{index}]"
        if not isinstance(entry, dict) or not isinstance(entry.get("ocr"), str):
            raise MalformedFileError(f"{manifest_path}: {where}.ocr must be a path string")
        doc_id = entry.get("id")
        if doc_id is not None and not isinstance(doc_id, str):
            raise MalformedFileError(f"{manifest_path}: {where}.id must be a string")
        jobs.append(
            (
                base / entry["ocr"],
                _optional_path(entry, "image", where),
                _optional_path(entry, "annotation", where),
                doc_id,
            )
        )

    with ThreadPoolExecutor(max_workers=resolve_threads(threads)) as pool:
        docs = list(
            pool.map(
                lambda job: load_document(job[0], job[1], job[2], schema, doc_id=job[3]),
                jobs,
            )
        )
    logger.info("Loaded %d documents from %s", len(docs), manifest_path)
    return Dataset(schema=schema, docs=tuple(docs))


def write_document(ldoc: LabeledDocument, docs_dir: Path) -> dict[str, Optional[str]]:
    """Write the OCR/image/annotation triple of one document; return its manifest entry."""

    document = ldoc.document
    ocr_name = f"{document.id}.ocr.json"
    _write_json(
        docs_dir / ocr_name,
        {"width": document.width, "height": document.height, "tokens": [t.to_json() for t in document.tokens]},
    )
    image_name: Optional[str] = None
    if document.image is not None:
        image_name = f"{document.id}.ppm"
        write_ppm(docs_dir / image_name, document.image)
    annotation_name = f"{document.id}.ann.json"
    _write_json(docs_dir / annotation_name, ldoc.annotation.to_json())
    return {
        "id": document.id,
        "ocr": f"{DOCS_DIRNAME}/{ocr_name}",
        "image": f"{DOCS_DIRNAME}/{image_name}" if image_name else None,
        "annotation": f"{DOCS_DIRNAME}/{annotation_name}",
    }


def write_dataset(dataset: Dataset, out_dir: Path) -> Path:
    """Write a dataset directory and return the path of its manifest."""

    out_dir = Path(out_dir)
    docs_dir = out_dir / DOCS_DIRNAME
    try:
        docs_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailureError(f"Unable to create {docs_dir}: {exc}") from exc
    entries = [write_document(ldoc, docs_dir) for ldoc in dataset.docs]
    manifest_path = out_dir / MANIFEST_NAME
    _write_json(manifest_path, {"schema": dataset.schema.to_json(), "documents": entries})
    logger.info("Wrote %d documents to %s", len(entries), out_dir)
    return manifest_path
