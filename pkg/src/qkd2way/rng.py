"""Deterministic random streams.

All sampling in the package goes through explicitly seeded, counter-based
Philox generators.  A stream is keyed by a 64-bit seed plus an optional
branch path, so any chunk of work (a round batch, a worker's slice) can
re-derive its own generator independent of execution order.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed: int, *branch: int) -> np.random.Generator:
    """Generator for (seed, branch...); identical inputs give identical streams."""
    seq = np.random.SeedSequence(seed & _MASK64, spawn_key=tuple(b & _MASK64 for b in branch))
    return np.random.Generator(np.random.Philox(seq))
