import numpy as np
import pytest

from visualwordgrid.exceptions import BadMagicError, IoFailureError, ShapeOverflowError
from visualwordgrid.grid import read_tensor, write_tensor
from visualwordgrid.grid.tensor_io import encode_shape


def test_round_trip_is_bit_exact(tmp_path):
    tensor = np.random.default_rng(0).standard_normal((5, 4, 3)).astype(np.float32)
    tensor[0, 0, 0] = -0.0
    path = tmp_path / "t.vwgt"

    write_tensor(path, tensor)
    loaded = read_tensor(path)

    assert loaded.shape == (5, 4, 3)
    assert loaded.tobytes() == tensor.tobytes()


def test_header_layout(tmp_path):
    path = tmp_path / "t.vwgt"
    write_tensor(path, np.ones((2, 3), dtype=np.float32))

    data = path.read_bytes()

    assert data[:4] == b"VWGT"
    assert data[4] == 0 and data[5] == 2
    assert data[6:14] == (2).to_bytes(4, "little") + (3).to_bytes(4, "little")
    assert len(data) == 14 + 6 * 4


def test_mask_stored_as_float(tmp_path):
    mask = np.array([[0, 1], [4, 2]], dtype=np.int64)
    path = tmp_path / "m.vwgt"
    write_tensor(path, mask)
    assert read_tensor(path).astype(np.int64).tolist() == mask.tolist()


def test_wrong_magic(tmp_path):
    path = tmp_path / "t.vwgt"
    path.write_bytes(b"NOPE\x00\x01\x01\x00\x00\x00")
    with pytest.raises(BadMagicError):
        read_tensor(path)


def test_truncated_payload(tmp_path):
    path = tmp_path / "t.vwgt"
    write_tensor(path, np.zeros((4, 4), dtype=np.float32))
    path.write_bytes(path.read_bytes()[:-3])
    with pytest.raises(IoFailureError):
        read_tensor(path)


def test_zero_length_dimension_rejected(tmp_path):
    with pytest.raises(ShapeOverflowError):
        write_tensor(tmp_path / "t.vwgt", np.zeros((3, 0), dtype=np.float32))
    with pytest.raises(ShapeOverflowError):
        encode_shape((1 << 32,))


def test_missing_file(tmp_path):
    with pytest.raises(IoFailureError):
        read_tensor(tmp_path / "absent.vwgt")
