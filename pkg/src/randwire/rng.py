"""Deterministic random streams.

All sampling in this package draws from a Mersenne Twister (``random.Random``)
seeded directly with the 64-bit generator seed. Each sampler documents the
exact order in which it consumes the stream, so two runs with the same seed
produce byte-identical graphs, and an independent implementation of the same
consumption order reproduces them too.

Stage sub-seeds are derived with splitmix64 so that the stages of one network
are wired independently while the whole network stays a pure function of
(parameters, seed).
"""
from __future__ import annotations

import random

MASK64 = (1 << 64) - 1


def make_rng(seed: int) -> random.Random:
    """Return the package-wide PRNG (Mersenne Twister) for a 64-bit seed."""
    if not (0 <= seed <= MASK64):
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return random.Random(seed)


def splitmix64(x: int) -> int:
    """One round of the splitmix64 mixer (public-domain constants)."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def stage_seed(seed: int, stage_index: int) -> int:
    """Sub-seed for the ``stage_index``-th randomly wired stage (0-based).

    Defined as ``splitmix64(seed * 1000003 + stage_index)``.
    """
    return splitmix64((seed * 1000003 + stage_index) & MASK64)
