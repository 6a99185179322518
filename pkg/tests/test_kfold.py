import pytest

from visualwordgrid.corpus import split_kfold
from visualwordgrid.exceptions import ConfigError, DatasetTooSmallError


def test_hundred_documents_split_80_10_10():
    folds = split_kfold(100, 5, seed=42)

    assert len(folds) == 5
    for fold in folds:
        assert (len(fold.train), len(fold.validation), len(fold.test)) == (80, 10, 10)
        assert not set(fold.train) & set(fold.held_out)
        assert set(fold.train) | set(fold.held_out) == set(range(100))


def test_held_out_chunks_tile_the_dataset():
    folds = split_kfold(100, 5, seed=42)
    held_out = [set(fold.held_out) for fold in folds]

    for i, chunk in enumerate(held_out):
        for other in held_out[i + 1 :]:
            assert not chunk & other
    assert set().union(*held_out) == set(range(100))
    tests = [set(fold.test) for fold in folds]
    assert sum(len(t) for t in tests) == len(set().union(*tests))


def test_smallest_legal_dataset():
    for fold in split_kfold(10, 5, seed=0):
        assert (len(fold.train), len(fold.validation), len(fold.test)) == (8, 1, 1)


def test_uneven_sizes_differ_by_one():
    sizes = sorted(len(fold.held_out) for fold in split_kfold(23, 5, seed=1))
    assert sizes == [4, 4, 5, 5, 5]


def test_same_seed_same_partitions():
    assert split_kfold(40, 4, seed=9) == split_kfold(40, 4, seed=9)
    assert split_kfold(40, 4, seed=9) != split_kfold(40, 4, seed=10)


def test_accepts_a_dataset(visual_dataset):
    folds = split_kfold(visual_dataset, 2, seed=0)
    assert sum(len(fold.held_out) for fold in folds) == len(visual_dataset)


def test_too_small_dataset():
    with pytest.raises(DatasetTooSmallError):
        split_kfold(9, 5, seed=0)


def test_k_must_be_at_least_two():
    with pytest.raises(ConfigError):
        split_kfold(10, 1, seed=0)
