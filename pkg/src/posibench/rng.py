"""Deterministic 64-bit randomness for reproducible instance generation.

All randomness in the package flows from a single master seed through
``derive_seed``, so any stage (partitioning, per-part coefficient draws,
clause sampling, per-read annealing) can be reproduced in isolation.  The
stream generator is SplitMix64; the compiled kernels implement the exact
same update, so results are bit-identical across backends.

Seed derivation (the "mixing function" recorded in instance metadata):

    h = finalize(seed XOR GAMMA)
    for each label:  h = finalize(h XOR encode(label))

where ``finalize`` is the SplitMix64 finalizer, integer labels encode as
themselves (mod 2^64) and string labels as FNV-1a 64 of their UTF-8 bytes.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15

# 2^-53, so uniform() covers [0, 1) on the top 53 bits
_INV53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a bijective 64-bit scrambler."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & _MASK64
    return h


def derive_seed(seed: int, *labels: int | str) -> int:
    """Derive a child seed from ``seed`` and a sequence of stage labels."""
    h = mix64((seed ^ _GAMMA) & _MASK64)
    for label in labels:
        if isinstance(label, str):
            label = fnv1a64(label.encode("utf-8"))
        h = mix64((h ^ label) & _MASK64)
    return h


class Stream:
    """SplitMix64 stream with the handful of draw shapes the package needs."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK64
        return mix64(self.state)

    def uniform(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.u64() >> 11) * _INV53

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n) via 128-bit multiply-shift."""
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        return (self.u64() * n) >> 64

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def bit(self) -> int:
        return self.u64() >> 63

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]
