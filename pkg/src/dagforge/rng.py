"""Seedable bit source used by every sampler.

All randomness flows through :class:`RandomSource`, which hands out raw bits
from a Mersenne Twister and builds bounded integers from them by rejection.
Seeding with an integer is stable across platforms and Python versions, so a
fixed seed reproduces the same samples everywhere.
"""

from __future__ import annotations

import hashlib
import random
from fractions import Fraction


class RandomSource:
    """Deterministic stream of uniform bits.

    Args:
        seed: any integer. ``None`` seeds from the OS.
    """

    __slots__ = ("_gen", "bits_used")

    def __init__(self, seed: int | None = None) -> None:
        self._gen = random.Random(seed)
        self.bits_used = 0

    @classmethod
    def split(cls, seed: int, index: int) -> "RandomSource":
        """Independent stream number ``index`` derived from a master seed.

        Counter-based: stream ``i`` does not depend on how many bits any other
        stream consumed, so sample ``i`` can be regenerated on its own.
        """
        digest = hashlib.sha256(f"dagforge:{seed}:{index}".encode()).digest()
        return cls(int.from_bytes(digest, "big"))

    def bits(self, t: int) -> int:
        """Return ``t`` fresh uniform bits as a nonnegative integer."""
        if t <= 0:
            return 0
        self.bits_used += t
        return self._gen.getrandbits(t)

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` by bit-string rejection."""
        if bound < 1:
            raise ValueError(f"bound must be >= 1, got {bound}")
        t = (bound - 1).bit_length()
        getbits = self._gen.getrandbits
        while True:
            self.bits_used += t
            r = getbits(t) if t else 0
            if r < bound:
                return r

    def bernoulli(self, p: Fraction) -> bool:
        """One draw from Bernoulli(p) for an exact rational ``p``."""
        if p.denominator == 2:
            return bool(self.bits(1))
        return self.below(p.denominator) < p.numerator

    def shuffle(self, items: list) -> None:
        """Fisher-Yates shuffle in place."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def choose(self, population: int, size: int) -> list[int]:
        """Uniform ``size``-subset of ``range(population)`` (partial Fisher-Yates)."""
        if not 0 <= size <= population:
            raise ValueError(f"cannot choose {size} of {population}")
        if 2 * size > population:
            picked = set(self.choose(population, population - size))
            return [i for i in range(population) if i not in picked]
        # sparse partial shuffle keeps memory O(size) for huge populations
        swapped: dict[int, int] = {}
        out = []
        for i in range(size):
            j = i + self.below(population - i)
            out.append(swapped.get(j, j))
            swapped[j] = swapped.get(i, i)
        return out

    def weighted_index(self, weights: list[int]) -> int:
        """Index ``i`` with probability ``weights[i] / sum(weights)``.

        Weights are nonnegative integers of any size; the draw is exact.
        """
        total = sum(weights)
        if total < 1:
            raise ValueError("weights must have a positive sum")
        r = self.below(total)
        acc = 0
        for i, w in enumerate(weights):
            acc += w
            if r < acc:
                return i
        raise AssertionError("unreachable")
