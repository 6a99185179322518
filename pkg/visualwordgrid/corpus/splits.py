"""Seeded k-fold partitions into train / validation / test."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sized, Union

from ..exceptions import ConfigError, DatasetTooSmallError
from ..rng import STREAM_SPLIT, Xoshiro256, derive_seed


@dataclass(frozen=True)
class FoldSplit:
    """Document indices of one fold; ``held_out`` is validation followed by test."""

    train: tuple[int, ...]
    validation: tuple[int, ...]
    test: tuple[int, ...]

    @property
    def held_out(self) -> tuple[int, ...]:
        return self.validation + self.test


def split_kfold(dataset: Union[Sized, int], k: int, seed: int) -> list[FoldSplit]:
    """Partition the indices of ``dataset`` (or ``range(dataset)``) into ``k`` folds.

    Fold ``i`` holds out the ``i``-th chunk of a seeded permutation; the chunk
    is halved into validation (first half, rounded down) and test. Chunks
    differ in size by at most one document.
    """

    num_docs = dataset if isinstance(dataset, int) else len(dataset)
    if k < 2:
        raise ConfigError("k must be >= 2")
    if num_docs < 2 * k:
        raise DatasetTooSmallError(f"{num_docs} documents cannot fill {k} folds of at least 2")
    order = list(range(num_docs))
    Xoshiro256(derive_seed(seed, STREAM_SPLIT)).shuffle(order)
    base, extra = divmod(num_docs, k)
    chunks: list[list[int]] = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        chunks.append(order[start : start + size])
        start += size
    folds = []
    for i, chunk in enumerate(chunks):
        half = len(chunk) // 2
        train = sorted(index for j, other in enumerate(chunks) if j != i for index in other)
        folds.append(
            FoldSplit(
                train=tuple(train),
                validation=tuple(sorted(chunk[:half])),
                test=tuple(sorted(chunk[half:])),
            )
        )
    return folds
