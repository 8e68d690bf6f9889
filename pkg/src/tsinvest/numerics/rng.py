"""Seeded random number generation.

Philox4x32 (counter-based, via numpy) is the single algorithm used across
the package. Determinism contract: same seed, same draw sequence within
this implementation; bit-equality across implementations is not promised.
"""

from __future__ import annotations

import numpy as np

ALGORITHM = "philox4x32-numpy"


class Rng:
    """Thin wrapper over numpy's Philox generator with a fixed identifier."""

    def __init__(self, seed: int):
        self.algorithm = ALGORITHM
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.Philox(self.seed))

    def spawn(self, stream: int) -> "Rng":
        """Independent child stream, deterministic in (seed, stream)."""
        return Rng(self.seed * 1_000_003 + stream)

    def uniform(self, low=0.0, high=1.0, size=None) -> np.ndarray:
        return self._gen.uniform(low, high, size)

    def normal(self, loc=0.0, scale=1.0, size=None) -> np.ndarray:
        return self._gen.normal(loc, scale, size)

    def integers(self, low, high=None, size=None) -> np.ndarray:
        return self._gen.integers(low, high, size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def choice(self, n, size=None, replace=True) -> np.ndarray:
        return self._gen.choice(n, size=size, replace=replace)
