"""Seeded xoshiro256** stream with Box-Muller normals.

Fixture generation pins the generator itself, not just the seed, so that
the same spec yields the same data everywhere.  The 256-bit state is
expanded from the 64-bit seed with splitmix64 (the generator author's
recommended seeding), raw 64-bit words come from xoshiro256**, doubles
take the top 53 bits, and normal deviates use Box-Muller on consecutive
uniforms (two per deviate, nothing cached).
"""

from __future__ import annotations

import math

import numpy as np

from ._kernels import xoshiro_fill

_MASK64 = (1 << 64) - 1
_BUF_SIZE = 1024
_TWO_PI = 2.0 * math.pi
_INV_2_53 = 2.0 ** -53


def _splitmix64(x: int):
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x, z ^ (z >> 31)


class Xoshiro256StarStar:
    """Deterministic PRNG; all library randomness flows through this."""

    def __init__(self, seed: int):
        x = int(seed) & _MASK64
        words = []
        for _ in range(4):
            x, w = _splitmix64(x)
            words.append(w)
        if not any(words):
            words[0] = 1
        self._state = np.array(words, dtype=np.uint64)
        self._buf = np.empty(_BUF_SIZE, dtype=np.uint64)
        self._pos = _BUF_SIZE

    @property
    def state(self) -> tuple[int, int, int, int]:
        # pending buffered words are part of the observable stream position,
        # so expose the raw words only for diagnostics
        return tuple(int(w) for w in self._state)

    def next_u64(self) -> int:
        if self._pos >= _BUF_SIZE:
            xoshiro_fill(self._state, self._buf)
            self._pos = 0
        value = int(self._buf[self._pos])
        self._pos += 1
        return value

    def uniform(self) -> float:
        """Double in [0, 1) from the top 53 bits of one word."""
        return (self.next_u64() >> 11) * _INV_2_53

    def uniforms(self, n: int) -> np.ndarray:
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            out[i] = (self.next_u64() >> 11) * _INV_2_53
        return out

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        u1 = 1.0 - self.uniform()  # (0, 1]: keeps the log finite
        u2 = self.uniform()
        return mu + sigma * math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)

    def exponential(self, mean: float) -> float:
        return -mean * math.log1p(-self.uniform())

    def randrange(self, n: int) -> int:
        """Integer in [0, n) via the uniform double (n is desk-scale here)."""
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        return min(int(self.uniform() * n), n - 1)

    def choice(self, seq):
        return seq[self.randrange(len(seq))]
