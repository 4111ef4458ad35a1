"""Seeded random streams.

Every stochastic operation in this package draws from a RandomStream, never
from global state, so any pipeline output is a pure function of the seeds
fed into it. Streams can derive independent named substreams, which is how
shuffling, augmentation, dropout and weight init stay decoupled: consuming
extra draws in one substream never shifts another.
"""

from __future__ import annotations

import zlib

import numpy as np


def _tag_to_int(tag: str) -> int:
    # crc32 is stable across platforms and Python versions, unlike hash()
    return zlib.crc32(tag.encode("utf-8"))


class RandomStream:
    """A counted, seed-deterministic wrapper around numpy's Generator.

    The sequence of draws is a pure function of ``seed``; ``draw_count``
    tracks how many draw calls were made (useful when asserting that two
    code paths consumed the same amount of randomness).
    """

    def __init__(self, seed: int, _spawn_key: tuple[int, ...] = ()):
        self.seed = int(seed)
        self._spawn_key = _spawn_key
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=_spawn_key)
        self._gen = np.random.Generator(np.random.PCG64(seq))
        self.draw_count = 0

    def derive(self, tag: str) -> "RandomStream":
        """Return an independent substream keyed by ``tag``.

        Derivation is stateless: the same (seed, tag path) always yields the
        same substream, regardless of how many draws the parent has made.
        """
        return RandomStream(self.seed, self._spawn_key + (_tag_to_int(tag),))

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None) -> np.ndarray | float:
        self.draw_count += 1
        return self._gen.uniform(low, high, size=size)

    def normal(self, loc: float = 0.0, scale: float = 1.0, size=None) -> np.ndarray | float:
        self.draw_count += 1
        return self._gen.normal(loc, scale, size=size)

    def integers(self, low: int, high: int, size=None):
        self.draw_count += 1
        return self._gen.integers(low, high, size=size)

    def permutation(self, n: int) -> np.ndarray:
        self.draw_count += 1
        return self._gen.permutation(n)

    def bernoulli(self, p: float = 0.5, size=None):
        self.draw_count += 1
        return self._gen.random(size=size) < p

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, path={self._spawn_key}, draws={self.draw_count})"
