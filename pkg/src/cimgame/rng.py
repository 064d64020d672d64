"""Deterministic RNG substream derivation.

All randomness in a run flows from one master seed. Substreams are derived
from (master seed, stream name, index), and heavy kernels consume one uint64
seed per unit of work (RR set, diffusion run), so results never depend on
how the work is batched or how many workers execute it.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _name_key(name: str) -> int:
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def substream(master_seed: int, name: str, index: int = 0) -> np.random.Generator:
    """Generator for the named substream of a master seed."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(_name_key(name), index))
    return np.random.default_rng(seq)


def stream_seeds(master_seed: int, name: str, count: int) -> np.ndarray:
    """`count` independent uint64 work-unit seeds for a named substream."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(_name_key(name),))
    return seq.generate_state(count, dtype=np.uint64)


def draw_seeds(rng: np.random.Generator, count: int) -> np.ndarray:
    """uint64 work-unit seeds drawn from an existing stream."""
    return rng.integers(0, 1 << 64, size=count, dtype=np.uint64)
