"""Seeded randomness helpers.

Every random decision in the pipeline flows through a counter-based
generator (Philox) keyed by ``(seed, stream)``.  Distinct pipeline stages
use distinct stream constants, so e.g. token subsampling and noise
injection never consume from the same stream and adding randomness to one
stage cannot shift the draws of another.  Philox is counter-based, which
makes the draw sequence for a given key reproducible across platforms and
independent of how many values earlier callers consumed.
"""

from __future__ import annotations

import numpy as np

# Stream identifiers, one per randomized pipeline stage.
STREAM_SEQUENCES = 1
STREAM_TOKENS = 2
STREAM_NOISE = 3
STREAM_SYNTHETIC = 4
STREAM_HAUSDORFF = 5


def make_rng(seed: int, stream: int) -> np.random.Generator:
    """Return the generator for one (seed, stream) pair.

    The same pair always yields the same draw sequence, and the sequence is
    prefix-stable: asking for fewer values returns a prefix of the longer
    sequence.
    """
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    if stream < 0:
        raise ValueError(f"stream must be non-negative, got {stream}")
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def shuffled_prefix(n_items: int, n_take: int, rng: np.random.Generator) -> np.ndarray:
    """First ``n_take`` positions of a seeded shuffle of ``range(n_items)``.

    Implements the shuffle-then-truncate convention with a partial
    Fisher-Yates pass: only the first ``n_take`` swap steps of the full
    shuffle are performed, which makes the result for a smaller ``n_take``
    a prefix of the result for a larger one under the same generator state.
    """
    if not 0 <= n_take <= n_items:
        raise ValueError(f"cannot take {n_take} items out of {n_items}")
    pool = np.arange(n_items, dtype=np.int64)
    if n_take == 0:
        return pool[:0]
    u = rng.random(n_take)
    for i in range(n_take):
        # Draw j uniformly from [i, n_items); the min() guard keeps the
        # index in range in the measure-zero event u[i] == 1.0 rounding up.
        j = i + min(int(u[i] * (n_items - i)), n_items - i - 1)
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:n_take].copy()
