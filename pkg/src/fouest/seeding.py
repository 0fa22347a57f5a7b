"""Deterministic seed derivation for parallel-safe replication streams.

A 64-bit master seed identifies a whole experiment; each replication draws
its own substream seed with :func:`substream_seed`. The derivation is the
SplitMix64 output function applied to the k-th state of the SplitMix64
sequence started at the master seed, so substreams are decorrelated and
independent of execution order or worker count.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One SplitMix64 finalization step (Steele et al. mixing constants)."""
    x &= _MASK64
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def substream_seed(master_seed: int, counter: int) -> int:
    """Seed for substream `counter` of the stream keyed by `master_seed`."""
    if counter < 0:
        raise ValueError(f"substream counter must be >= 0, got {counter}")
    state = (master_seed + (counter + 1) * _GOLDEN) & _MASK64
    return splitmix64(state)


def make_rng(seed: int) -> np.random.Generator:
    """Fresh PCG64 generator for a derived 64-bit seed."""
    return np.random.default_rng(seed)
