"""Seeded, splittable random streams.

Every generator is a counter-based Philox stream whose 128-bit key is derived
from ``(seed, stream)`` by :func:`mix`. Two runs with the same seed and stream
index produce identical draws on any platform numpy supports, and distinct
stream indices give statistically independent children for parallel work.

The mixing function is the splitmix64 finalizer applied to
``seed + (stream + 1) * 0x9E3779B97F4A7C15`` (mod 2**64); the upper key word
is a second splitmix64 round of the first.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(z):
    z = (z + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix(seed: int, stream: int = 0) -> int:
    """Map ``(seed, stream)`` to a 128-bit Philox key."""
    lo = _splitmix64((int(seed) + (int(stream) + 1) * GOLDEN) & MASK64)
    hi = _splitmix64(lo)
    return (hi << 64) | lo


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=mix(seed, stream)))
