"""Seedable randomness with platform-stable streams.

Randomness is backed by numpy's Philox bit generator, a counter-based
generator whose output is a pure function of (seed, counter).  Identical
seeds therefore reproduce identical draw sequences across runs and
platforms, which the determinism guarantees of the training loop and the
CLI manifests rely on.

An ``RngState`` owns its counter: draws advance it in place, and the class
is deliberately not shared between threads (single-owner discipline).  Use
``fork`` to derive independent streams.
"""

from __future__ import annotations

import numpy as np


class RngState:
    """Counter-based random stream (Philox) with a fixed 64-bit seed."""

    __slots__ = ("seed", "_gen", "_draws")

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._gen = np.random.Generator(np.random.Philox(key=self.seed))
        self._draws = 0

    def __repr__(self) -> str:
        return f"RngState(seed={self.seed}, draws={self._draws})"

    @property
    def draws(self) -> int:
        """Number of sampling calls made so far (the logical counter)."""
        return self._draws

    def normal(self, shape) -> np.ndarray:
        """I.i.d. standard-normal tensor; advances the stream."""
        self._draws += 1
        return self._gen.standard_normal(shape)

    def uniform(self, shape, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        """I.i.d. uniform draws on [lo, hi); advances the stream."""
        self._draws += 1
        return self._gen.uniform(lo, hi, shape)

    def integers(self, n: int, size) -> np.ndarray:
        self._draws += 1
        return self._gen.integers(0, n, size=size)

    def fork(self, salt: int) -> "RngState":
        """Independent stream derived from (seed, salt); does not advance self."""
        return RngState((self.seed * 0x9E3779B97F4A7C15 + salt + 1) & 0xFFFFFFFFFFFFFFFF)


def normal(rng: RngState, shape) -> np.ndarray:
    return rng.normal(shape)


def uniform(rng: RngState, shape, lo: float, hi: float) -> np.ndarray:
    return rng.uniform(shape, lo, hi)
