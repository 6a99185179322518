import os
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from visualwordgrid.corpus import (
    Annotation,
    Document,
    FieldSchema,
    LabeledDocument,
    RGBImage,
    SynthConfig,
    TokenBox,
    derive_ground_truth,
    synth_generate,
)

slow = pytest.mark.skipif(os.getenv("VWG_RUN_SLOW") != "1", reason="set VWG_RUN_SLOW=1 for acceptance runs")


def build_document(tokens, *, width=64, height=64, image=None, doc_id="doc"):
    """Document from ``(text, x, y, w, h)`` tuples in reading order."""

    boxes = tuple(TokenBox(index=i, text=t[0], x=t[1], y=t[2], w=t[3], h=t[4]) for i, t in enumerate(tokens))
    return Document(id=doc_id, width=width, height=height, tokens=boxes, image=image)


def solid_image(width, height, color=(255, 255, 255)):
    return RGBImage(width=width, height=height, pixels=np.full((height, width, 3), color, dtype=np.uint8))


def label(document, schema, regions=None):
    annotation = Annotation({name: tuple((regions or {}).get(name, ())) for name in schema.field_names})
    return LabeledDocument(
        document=document,
        annotation=annotation,
        gt_assignment=derive_ground_truth(document, annotation, schema),
    )


@pytest.fixture
def schema():
    return FieldSchema()


@pytest.fixture(scope="session")
def visual_dataset():
    return synth_generate(SynthConfig(num_docs=12, variant="visual", image_width=192, image_height=256, seed=3), threads=2)


@pytest.fixture(scope="session")
def text_dataset():
    return synth_generate(SynthConfig(num_docs=6, variant="text", image_width=192, image_height=256, seed=5), threads=1)
