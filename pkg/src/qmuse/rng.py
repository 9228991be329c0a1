"""Seed derivation and a small xoshiro256** generator.

Every random decision in the package flows from one 64-bit master seed.
Substreams are derived by hashing the seed together with integer stream
identifiers through splitmix64, so results never depend on call order or on
how shots are split across threads.
"""

from __future__ import annotations

from .kernels import MASK64, splitmix64, xoshiro_next, xoshiro_seed

_INV_2_53 = 1.0 / 9007199254740992.0


def derive_seed(seed: int, *stream: int) -> int:
    """Derive an independent 64-bit seed for the substream ``stream`` of ``seed``."""
    h = splitmix64(seed & MASK64)
    for part in stream:
        h = splitmix64(h ^ (part & MASK64))
    return h


class Xoshiro256:
    """xoshiro256** seeded from a splitmix64 expansion of a 64-bit seed."""

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self._s = xoshiro_seed(self.seed)

    def next_u64(self) -> int:
        return xoshiro_next(self._s)

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _INV_2_53

    def randrange(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randrange() needs a positive bound")
        # Lemire-style rejection keeps the result unbiased.
        threshold = ((1 << 64) - n) % n
        while True:
            x = self.next_u64()
            m = x * n
            if (m & MASK64) >= threshold:
                return m >> 64
