"""Seeded random bits via SplitMix64.

All sampling in this package draws from SplitMix64 streams (Steele, Lea &
Flood's mixer: state advances by the golden-gamma increment, the output is
the mixed state). The algorithm is fixed here so that traces are bit-for-bit
reproducible across platforms and across the numba/numpy kernel backends,
which re-implement exactly the same arithmetic on uint64.

Stream layout:

* ``Stream(seed)`` yields ``mix64(seed + GAMMA)``, ``mix64(seed + 2*GAMMA)``, ...
* ``substream_seed(seed, i)`` is the (i+1)-th output of ``Stream(seed)`` and
  seeds the stream of sample/walk number ``i``. Deriving per-sample streams
  from the sample index makes Monte-Carlo results independent of how samples
  are partitioned across workers.

Random bits are the low bit of an output word; a k-bit block is the low k
bits of one output word.
"""

from __future__ import annotations

GAMMA = 0x9E3779B97F4A7C15
_M64 = (1 << 64) - 1


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit word."""
    z &= _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return (z ^ (z >> 31)) & _M64


def substream_seed(seed: int, index: int) -> int:
    """Seed of the derived stream for sample number ``index``."""
    return mix64(seed + (index + 1) * GAMMA)


class Stream:
    """Sequential SplitMix64 stream."""

    __slots__ = ("_state", "seed")

    def __init__(self, seed: int):
        self.seed = seed & _M64
        self._state = self.seed

    def next_word(self) -> int:
        self._state = (self._state + GAMMA) & _M64
        return mix64(self._state)

    def bit(self) -> int:
        return self.next_word() & 1

    def bits(self, k: int) -> int:
        """A uniform k-bit integer (0 <= k <= 64) from one output word."""
        if k == 0:
            return 0
        return self.next_word() & ((1 << k) - 1)
