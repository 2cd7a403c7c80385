"""Seeding helpers.

Every generator in the package is a ``numpy.random.Generator`` over PCG64.
Per-trial seeds come from a master seed and a trial index through the
SplitMix64 finalizer, so a trial's randomness never depends on scheduling.
"""
from __future__ import annotations

import numpy as np

RNG_ALGORITHM = "numpy.PCG64"

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """SplitMix64 output function applied to a 64-bit integer."""
    z = (x + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int, stream: int = 0) -> int:
    """64-bit seed for trial ``index`` (and sub-stream ``stream``) of ``master``."""
    x = splitmix64((master & _MASK64) ^ splitmix64(index & _MASK64))
    if stream:
        x = splitmix64(x ^ splitmix64((stream * _GOLDEN) & _MASK64))
    return x


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))
