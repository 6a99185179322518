import numpy as np
import pytest

from conftest import build_document, label, solid_image
from visualwordgrid.corpus import Rect
from visualwordgrid.corpus.types import RGBImage
from visualwordgrid.embed import Embedder, EmbedderConfig
from visualwordgrid.exceptions import ConfigError, DimensionMismatchError, MissingImageError
from visualwordgrid.grid import (
    GridSpec,
    coverage_mask,
    create_encoder,
    make_two_encoder_inputs,
    rasterize_layout,
    rasterize_target_mask,
    rasterize_vwg_pad,
    rasterize_wordgrid,
    resize_image,
    scale_box,
)

D = 8


@pytest.fixture(scope="module")
def embedder():
    return Embedder(EmbedderConfig(dim=D, seed=0))


def test_scale_box_examples():
    spec = GridSpec(H=150, W=200, d=D)
    cells = scale_box(Rect(100, 200, 40, 20), 800, 600, spec)
    assert (cells.col_start, cells.col_end, cells.row_start, cells.row_end) == (25, 35, 50, 55)

    tiny = scale_box(Rect(3, 3, 1, 1), 800, 600, spec)
    assert tiny.size == 1

    whole = scale_box(Rect(0, 0, 800, 600), 800, 600, spec)
    assert (whole.row_start, whole.row_end, whole.col_start, whole.col_end) == (0, 150, 0, 200)


def test_scale_box_keeps_separated_boxes_disjoint():
    spec = GridSpec(H=16, W=16, d=D)
    left = scale_box(Rect(0, 0, 10, 8), 64, 64, spec)
    right = scale_box(Rect(18, 0, 10, 8), 64, 64, spec)
    assert left.col_end <= right.col_start


def test_grid_spec_validation():
    with pytest.raises(ConfigError):
        GridSpec(H=4, W=16, d=D)
    with pytest.raises(ConfigError):
        GridSpec(H=20, W=16, d=D).check_depth(3)
    GridSpec(H=24, W=16, d=D).check_depth(3)


def test_layout_of_empty_document_is_zero():
    spec = GridSpec(H=8, W=8, d=D)
    assert not rasterize_layout(build_document([]), spec).any()


def test_layout_marks_covered_cells():
    spec = GridSpec(H=8, W=8, d=D)
    # 64 px page, 8 px per cell: x,y in [8, 24) covers cells 1..2.
    document = build_document([("a", 8, 8, 16, 16), ("b", 10, 10, 4, 4)])

    layout = rasterize_layout(document, spec)

    assert layout.shape == (8, 8, 3)
    assert set(np.unique(layout)) == {0.0, 1.0}
    assert layout[1:3, 1:3].all()
    assert layout.sum() == 4 * 3


def test_wordgrid_later_token_wins(embedder):
    spec = GridSpec(H=8, W=8, d=D)
    document = build_document([("total", 8, 8, 16, 8), ("due", 16, 8, 8, 8)])

    grid = rasterize_wordgrid(document, spec, embedder)

    assert np.array_equal(grid[1, 1], embedder.embed("total"))
    assert np.array_equal(grid[1, 2], embedder.embed("due"))
    assert not grid[0].any()


def test_wordgrid_requires_matching_dimension():
    spec = GridSpec(H=8, W=8, d=D)
    with pytest.raises(DimensionMismatchError):
        rasterize_wordgrid(build_document([]), spec, Embedder(EmbedderConfig(dim=D + 1)))


def test_pad_covered_cells_have_no_rgb(embedder):
    spec = GridSpec(H=8, W=8, d=D)
    pixels = np.zeros((64, 64, 3), dtype=np.uint8)
    pixels[..., 0] = 255
    document = build_document([("total", 0, 0, 8, 8)], image=RGBImage(64, 64, pixels))

    pad = rasterize_vwg_pad(document, spec, embedder)

    assert pad.shape == (8, 8, D + 3)
    assert not pad[0, 0, D:].any()
    assert np.array_equal(pad[0, 0, :D], embedder.embed("total"))
    assert pad[3, 3].tolist() == [0.0] * D + [1.0, 0.0, 0.0]


def test_pad_on_white_page_without_tokens(embedder):
    spec = GridSpec(H=8, W=8, d=D)
    pad = rasterize_vwg_pad(build_document([], image=solid_image(64, 64)), spec, embedder)
    assert np.all(pad[..., D:] == 1.0)
    assert not pad[..., :D].any()


def test_visual_encodings_require_an_image(embedder):
    spec = GridSpec(H=8, W=8, d=D)
    document = build_document([("a", 0, 0, 8, 8)])
    with pytest.raises(MissingImageError):
        rasterize_vwg_pad(document, spec, embedder)
    with pytest.raises(MissingImageError):
        make_two_encoder_inputs(document, spec, embedder)


def test_only_visual_encoders_declare_an_image_input(embedder):
    spec = GridSpec(H=8, W=8, d=D)
    kinds = ("layout", "wordgrid", "vwg_pad", "vwg_2enc")
    needs = {kind: create_encoder(kind, spec, embedder).needs_image for kind in kinds}

    assert needs == {"layout": False, "wordgrid": False, "vwg_pad": True, "vwg_2enc": True}


def test_resize_image_centre_sampling():
    pixels = np.arange(12, dtype=np.uint8).reshape(2, 2, 3)
    image = RGBImage(2, 2, pixels)

    assert np.array_equal(resize_image(image, 1, 1)[0, 0], pixels[1, 1] / np.float32(255))
    assert np.array_equal(resize_image(image, 2, 2), pixels.astype(np.float32) / np.float32(255))


def test_two_encoder_inputs(embedder, visual_dataset):
    spec = GridSpec(H=32, W=24, d=D)
    document = visual_dataset.docs[0].document

    wordgrid, image = make_two_encoder_inputs(document, spec, embedder)

    assert wordgrid.shape == (32, 24, D)
    assert image.shape == (32, 24, 3)
    assert image.min() >= 0.0 and image.max() <= 1.0
    assert np.array_equal(wordgrid, rasterize_wordgrid(document, spec, embedder))
    assert np.array_equal(image, resize_image(document.image, 32, 24))


def test_target_mask_paints_token_class(schema):
    spec = GridSpec(H=8, W=8, d=D)
    document = build_document([("acme", 0, 0, 8, 8), ("42", 16, 16, 16, 16)])
    ldoc = label(document, schema, {"supplier": [Rect(14, 14, 20, 20)]})

    mask = rasterize_target_mask(ldoc, spec)

    assert mask.dtype == np.int64
    assert (mask == 2).sum() == 4
    assert mask[2:4, 2:4].tolist() == [[2, 2], [2, 2]]
    assert (mask == 0).sum() == 60


def test_unannotated_mask_is_background(schema):
    spec = GridSpec(H=8, W=8, d=D)
    ldoc = label(build_document([("a", 0, 0, 8, 8)]), schema)
    assert not rasterize_target_mask(ldoc, spec).any()


def test_encoding_properties_over_synthetic_documents(embedder):
    from visualwordgrid.corpus import SynthConfig, synth_generate

    dataset = synth_generate(SynthConfig(num_docs=100, image_width=128, image_height=160, seed=21), threads=4)
    spec = GridSpec(H=40, W=32, d=D)
    for ldoc in dataset:
        document = ldoc.document
        pad = rasterize_vwg_pad(document, spec, embedder)
        wordgrid = rasterize_wordgrid(document, spec, embedder)
        layout = rasterize_layout(document, spec)
        covered = coverage_mask(document, spec)
        mask = rasterize_target_mask(ldoc, spec)

        text_empty = ~pad[..., :D].any(axis=-1)
        rgb_empty = ~pad[..., D:].any(axis=-1)
        assert np.all(text_empty | rgb_empty)
        assert np.array_equal(pad[..., :D], wordgrid)
        assert np.array_equal(layout[..., 0] == 1.0, covered)
        assert np.array_equal(rgb_empty, covered)
        assert np.all(covered[mask > 0])
        assert mask.max() <= dataset.schema.num_fields


def test_create_encoder_factory(embedder):
    spec = GridSpec(H=16, W=16, d=D)
    channels = {"layout": (3, 0), "wordgrid": (D, 0), "vwg-pad": (D + 3, 0), "VWG_2ENC": (D, 3)}
    for kind, (main, aux) in channels.items():
        encoder = create_encoder(kind, spec, embedder)
        assert (encoder.main_channels, encoder.aux_channels) == (main, aux)
        arch = encoder.arch_for(5, base_channels=4, depth=2)
        assert arch.variant == ("dual" if aux else "single")
        assert arch.in_channels_main == main

    with pytest.raises(ConfigError):
        create_encoder("chargrid", spec, embedder)
    with pytest.raises(ConfigError):
        create_encoder("wordgrid", spec, None)
    assert create_encoder("layout", spec).encode(build_document([])).aux is None
