"""Counter-based splitmix64 stream used by every sampled check.

Value ``i`` of the stream seeded with ``seed`` is::

    z = seed + (i + 1) * 0x9E3779B97F4A7C15          (mod 2**64)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z ^ (z >> 31)

Bounded integers are taken as ``value % high``.  The modulo bias is below
``high / 2**64`` and is irrelevant for the tiny ranges used here.
"""

from __future__ import annotations

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, start: int, count: int) -> np.ndarray:
    """Return values ``start .. start+count-1`` of the stream as uint64."""
    seed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = seed + idx * GAMMA
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    """Sequential reader over the stream; identical seeds give identical draws."""

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.position = 0

    def raw(self, count: int) -> np.ndarray:
        out = splitmix64(self.seed, self.position, count)
        self.position += count
        return out

    def integers(self, high: int, size: int | tuple[int, ...]) -> np.ndarray:
        """Integers in ``[0, high)`` with the given shape, as int64."""
        shape = (size,) if isinstance(size, int) else tuple(size)
        total = int(np.prod(shape)) if shape else 1
        vals = self.raw(total) % np.uint64(high)
        return vals.astype(np.int64).reshape(shape)
