"""Deterministic RNG streams.

All randomness flows from numpy's PCG64 seeded through SeedSequence tuples, so
every consumer gets an independent, platform-stable stream. Streams are derived
from (base_seed, stream_tag, index) and never from call order, which keeps
per-game results identical whether games run serially or on a worker pool.
"""

from __future__ import annotations

import numpy as np

# Stream tags keep unrelated consumers of the same base seed decorrelated.
STREAM_GAME = 0        # dice, card shuffles
STREAM_TURN_ORDER = 1  # per-game seat permutation
STREAM_AGENT = 2       # agent-internal randomness (exploration, random agents)
STREAM_INIT = 3        # network weight initialization


def derive_rng(base_seed: int, stream: int, index: int = 0) -> np.random.Generator:
    """Independent generator for (base_seed, stream, index)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((base_seed, stream, index))))


def derive_seed(base_seed: int, stream: int, index: int = 0) -> int:
    """Stable 63-bit integer seed derived from the same tuple space."""
    seq = np.random.SeedSequence((base_seed, stream, index))
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> 1)
