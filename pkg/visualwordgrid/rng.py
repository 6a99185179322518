"""Portable deterministic random numbers.

Every stochastic choice in the pipeline (synthetic layouts, embedding buckets,
weight initialisation, shuffling, fold assignment) draws from ``Xoshiro256``
seeded through ``splitmix64``. Both algorithms use 64-bit integer arithmetic
only, so a given seed yields the same stream on every platform and in every
implementation of the format.
"""

from __future__ import annotations

from typing import MutableSequence, Sequence, TypeVar

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# Stream tags keep independent consumers of one seed from overlapping.
STREAM_DOCUMENT = 1
STREAM_PALETTE = 2
STREAM_BUCKET = 3
STREAM_INIT = 4
STREAM_SHUFFLE = 5
STREAM_SPLIT = 6

T = TypeVar("T")


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state and return ``(new_state, output)``."""

    state = (state + GOLDEN_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def derive_seed(seed: int, *keys: int) -> int:
    """Mix ``keys`` into ``seed`` to obtain the seed of an independent stream."""

    state = seed & MASK64
    for key in keys:
        _, state = splitmix64(state ^ ((key * GOLDEN_GAMMA) & MASK64))
    return state


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a hash."""

    value = 0xCBF29CE484222325
    for byte in data:
        value ^= byte
        value = (value * 0x100000001B3) & MASK64
    return value


def _rotl(value: int, shift: int) -> int:
    return ((value << shift) | (value >> (64 - shift))) & MASK64


class Xoshiro256:
    """xoshiro256** generator with a splitmix64-expanded seed."""

    def __init__(self, seed: int) -> None:
        state = seed & MASK64
        words = []
        for _ in range(4):
            state, output = splitmix64(state)
            words.append(output)
        if not any(words):
            words[0] = 1
        self._s = words

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform float in ``[0, 1)`` with 53 bits of precision."""

        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` without modulo bias."""

        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % bound

    def randint(self, low: int, high: int) -> int:
        """Uniform integer in the closed range ``[low, high]``."""

        return low + self.below(high - low + 1)

    def bernoulli(self, probability: float) -> bool:
        return self.random() < probability

    def choice(self, items: Sequence[T]) -> T:
        return items[self.below(len(items))]

    def shuffle(self, items: MutableSequence[T]) -> None:
        """Fisher-Yates shuffle in place."""

        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def uniform_array(self, size: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        """Array of ``size`` float64 draws in ``[low, high)``."""

        values = np.fromiter((self.random() for _ in range(size)), dtype=np.float64, count=size)
        return low + (high - low) * values
