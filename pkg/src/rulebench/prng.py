"""Portable deterministic pseudo-random number generator.

Sampling and synthetic-data generation must reproduce byte-for-byte across
runs, platforms, and reimplementations, so nothing in this package may draw
from the host language's default generator. The stream here is xorshift64*
with the state derived from the seed by one splitmix64 step; both algorithms
are defined purely in terms of 64-bit integer arithmetic.
"""

from __future__ import annotations

from typing import Iterable, Sequence, TypeVar

_MASK64 = (1 << 64) - 1

T = TypeVar("T")


def mix64(value: int) -> int:
    """One splitmix64 scramble step. Bijective on 64-bit integers."""
    z = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class PortableRng:
    """xorshift64* stream with splitmix64 seeding.

    Two instances built from the same seed produce identical output
    sequences regardless of platform or interpreter version.
    """

    def __init__(self, seed: int):
        # mix64 is a bijection, so exactly one seed maps to a zero state;
        # xorshift64* cannot leave zero, hence the fallback constant.
        self._state = mix64(seed & _MASK64) or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & _MASK64
        x ^= x >> 27
        self._state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK64

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n). Rejection sampling keeps it unbiased."""
        if n <= 0:
            raise ValueError("randrange bound must be positive")
        limit = ((1 << 64) // n) * n
        while True:
            value = self.next_u64()
            if value < limit:
                return value % n

    def choice(self, items: Sequence[T]) -> T:
        if not items:
            raise ValueError("cannot choose from an empty sequence")
        return items[self.randrange(len(items))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, population: Iterable[T], k: int) -> list[T]:
        """k distinct items, drawn without replacement via partial shuffle."""
        items = list(population)
        if k < 0 or k > len(items):
            raise ValueError(f"sample size {k} out of range for population of {len(items)}")
        for i in range(k):
            j = i + self.randrange(len(items) - i)
            items[i], items[j] = items[j], items[i]
        return items[:k]
