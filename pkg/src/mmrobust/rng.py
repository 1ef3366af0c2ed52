"""Deterministic random streams for reproducible experiments.

Every random draw in this package comes from a `Stream`: a xoshiro256++
generator whose 256-bit state is filled from a 64-bit key by splitmix64.
Keys are derived from a run seed plus any number of labelled parts
(epoch numbers, sample ids, ...), so any component can rebuild exactly
the stream it needs without threading generator objects around.

The scheme is fixed so that independent implementations reproduce the
same draws bit for bit: splitmix64 for key mixing and state expansion,
xoshiro256++ for the raw 64-bit sequence, `(u64 >> 11) * 2^-53` for
uniforms, and the Marsaglia polar method for standard normals.
"""

from __future__ import annotations

import math
import struct

MASK64 = (1 << 64) - 1

_SM64_GAMMA = 0x9E3779B97F4A7C15
_SM64_MULT1 = 0xBF58476D1CE4E5B9
_SM64_MULT2 = 0x94D049BB133111EB

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (next_state, output)."""
    state = (state + _SM64_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * _SM64_MULT1) & MASK64
    z = ((z ^ (z >> 27)) * _SM64_MULT2) & MASK64
    return state, z ^ (z >> 31)


def fnv1a64(text: str) -> int:
    """64-bit FNV-1a hash of a string (UTF-8 bytes)."""
    h = _FNV_OFFSET
    for b in text.encode("utf-8"):
        h = ((h ^ b) * _FNV_PRIME) & MASK64
    return h


def _as_u64(part) -> int:
    if isinstance(part, str):
        return fnv1a64(part)
    if isinstance(part, float):
        # fold floats through their IEEE-754 bits so 0.3 and 0.30 agree
        return struct.unpack("<Q", struct.pack("<d", part))[0]
    if isinstance(part, int):
        return part & MASK64
    raise TypeError(f"stream key parts must be int, float or str, got {type(part).__name__}")


def derive_key(seed: int, *parts) -> int:
    """Fold labelled parts into a 64-bit key via splitmix64 finalization."""
    key = seed & MASK64
    for part in parts:
        _, key = splitmix64(key ^ _as_u64(part))
    return key


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Stream:
    """xoshiro256++ stream keyed by a seed plus labelled parts.

    `Stream(seed, *parts)` is a pure function of its arguments; two
    streams built from the same key produce identical sequences.
    """

    __slots__ = ("_s0", "_s1", "_s2", "_s3", "_spare_normal")

    def __init__(self, seed: int, *parts):
        sm = derive_key(seed, *parts)
        sm, self._s0 = splitmix64(sm)
        sm, self._s1 = splitmix64(sm)
        sm, self._s2 = splitmix64(sm)
        sm, self._s3 = splitmix64(sm)
        self._spare_normal = None

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        result = (_rotl((s0 + s3) & MASK64, 23) + s0) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def next_double(self) -> float:
        """Uniform in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.next_double()

    def next_below(self, bound: int) -> int:
        """Uniform integer in [0, bound) via multiply-shift."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return (self.next_u64() * bound) >> 64

    def normal(self) -> float:
        """Standard normal via the Marsaglia polar method."""
        if self._spare_normal is not None:
            z = self._spare_normal
            self._spare_normal = None
            return z
        while True:
            u = 2.0 * self.next_double() - 1.0
            v = 2.0 * self.next_double() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                break
        factor = math.sqrt(-2.0 * math.log(s) / s)
        self._spare_normal = v * factor
        return u * factor

    def normals(self, n: int) -> list[float]:
        return [self.normal() for _ in range(n)]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]

    def choose(self, items: list, k: int) -> list:
        """k distinct items via a partial Fisher-Yates pass (uniform over subsets)."""
        if not 0 <= k <= len(items):
            raise ValueError(f"cannot choose {k} of {len(items)} items")
        pool = list(items)
        for i in range(k):
            j = i + self.next_below(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
