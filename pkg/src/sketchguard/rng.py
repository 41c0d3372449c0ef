"""Deterministic random streams.

Every random draw in the library comes from a counter-based Philox stream
addressed by (seed, *key). Streams can therefore be regenerated in any order,
which makes results independent of execution schedule and lets streaming and
materialized code paths produce identical output.
"""

from __future__ import annotations

import numpy as np

MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    """Validate a 64-bit unsigned seed and return it as a plain int."""
    s = int(seed)
    if not 0 <= s <= MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return s


def substream(seed: int, *key: int) -> np.random.Generator:
    """Return an independent generator for the stream addressed by (seed, *key)."""
    ss = np.random.SeedSequence(entropy=check_seed(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *key: int) -> int:
    """Fold (seed, *key) into a fresh 64-bit seed for a child component."""
    ss = np.random.SeedSequence(entropy=check_seed(seed), spawn_key=key)
    return int(ss.generate_state(1, np.uint64)[0])
