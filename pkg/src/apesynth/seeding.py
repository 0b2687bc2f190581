"""Deterministic derivation of per-record random generators.

Every stochastic pipeline stage takes one 64-bit master seed. The generator
used for a record is derived solely from (seed, record id) through SplitMix64,
so outputs never depend on worker count or processing order. The derivation
below is part of the stable interface: changing it changes every sampled
artifact byte-for-byte.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One SplitMix64 output step for the state x (Steele et al. mix)."""
    z = (x + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_key(seed: int, record_id: int) -> int:
    """64-bit stream key for one record: splitmix64(splitmix64(seed) ^ id)."""
    return splitmix64(splitmix64(seed & _MASK64) ^ (record_id & _MASK64))


def record_rng(seed: int, record_id: int) -> np.random.Generator:
    """PCG64 generator for one record, independent of every other record's."""
    key = derive_key(seed, record_id)
    # Two dependent mixes give the 128-bit PCG64 state.
    return np.random.Generator(np.random.PCG64([key, splitmix64(key)]))


def stage_seed(seed: int, stage: str) -> int:
    """Sub-seed for a named pipeline stage running under one master seed."""
    acc = splitmix64(seed & _MASK64)
    for byte in stage.encode("utf-8"):
        acc = splitmix64(acc ^ byte)
    return acc
