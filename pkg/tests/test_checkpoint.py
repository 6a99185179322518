import struct

import numpy as np
import pytest

from visualwordgrid.corpus import FieldSchema
from visualwordgrid.embed import Embedder, EmbedderConfig
from visualwordgrid.exceptions import (
    BadMagicError,
    IoFailureError,
    MalformedFileError,
    ShapeMismatchError,
    VersionMismatchError,
)
from visualwordgrid.grid import GridSpec, create_encoder
from visualwordgrid.net import forward, init_params
from visualwordgrid.objective import Checkpoint, load_checkpoint, save_checkpoint

SPEC = GridSpec(H=16, W=16, d=8)
EMBEDDER = EmbedderConfig(dim=8, seed=2)


def _checkpoint(kind="vwg_pad"):
    schema = FieldSchema()
    arch = create_encoder(kind, SPEC, Embedder(EMBEDDER)).arch_for(schema.num_classes, base_channels=4, depth=2)
    return Checkpoint(
        arch=arch,
        schema=schema,
        spec=SPEC,
        embedder=EMBEDDER,
        params=init_params(arch, 5),
        metadata={"encoder_kind": kind, "epoch": 3},
    )


def test_round_trip_is_bitwise(tmp_path):
    original = _checkpoint()
    path = tmp_path / "model.vwgm"
    save_checkpoint(path, original)
    loaded = load_checkpoint(path)

    assert path.read_bytes()[:4] == b"VWGM"
    assert loaded.arch == original.arch
    assert loaded.schema == original.schema
    assert loaded.spec == original.spec
    assert loaded.embedder == original.embedder
    assert loaded.metadata == original.metadata
    assert list(loaded.params) == list(original.params)
    for name, value in original.params.items():
        assert loaded.params[name].tobytes() == value.tobytes()

    main = np.random.default_rng(0).random((16, 16, 11), dtype=np.float32)
    before, _ = forward(original.params, original.arch, main)
    after, _ = forward(loaded.params, loaded.arch, main)
    assert np.array_equal(before, after)


def test_saving_twice_gives_identical_bytes(tmp_path):
    checkpoint = _checkpoint("vwg_2enc")
    save_checkpoint(tmp_path / "a.vwgm", checkpoint)
    save_checkpoint(tmp_path / "b.vwgm", checkpoint)
    assert (tmp_path / "a.vwgm").read_bytes() == (tmp_path / "b.vwgm").read_bytes()


def test_truncated_file(tmp_path):
    path = tmp_path / "model.vwgm"
    save_checkpoint(path, _checkpoint())
    path.write_bytes(path.read_bytes()[:-10])
    with pytest.raises(IoFailureError):
        load_checkpoint(path)


def test_missing_file(tmp_path):
    with pytest.raises(IoFailureError):
        load_checkpoint(tmp_path / "absent.vwgm")


def test_bad_magic(tmp_path):
    path = tmp_path / "model.vwgm"
    save_checkpoint(path, _checkpoint())
    path.write_bytes(b"VWGT" + path.read_bytes()[4:])
    with pytest.raises(BadMagicError):
        load_checkpoint(path)


def test_version_mismatch(tmp_path):
    path = tmp_path / "model.vwgm"
    save_checkpoint(path, _checkpoint())
    data = path.read_bytes()
    path.write_bytes(data[:4] + struct.pack("<I", 2) + data[8:])
    with pytest.raises(VersionMismatchError):
        load_checkpoint(path)


def test_trailing_bytes(tmp_path):
    path = tmp_path / "model.vwgm"
    save_checkpoint(path, _checkpoint())
    path.write_bytes(path.read_bytes() + b"\0")
    with pytest.raises(MalformedFileError):
        load_checkpoint(path)


def test_dual_checkpoint_rejects_single_input(tmp_path):
    path = tmp_path / "model.vwgm"
    save_checkpoint(path, _checkpoint("vwg_2enc"))
    loaded = load_checkpoint(path)

    with pytest.raises(ShapeMismatchError):
        forward(loaded.params, loaded.arch, np.zeros((16, 16, 8), dtype=np.float32))
