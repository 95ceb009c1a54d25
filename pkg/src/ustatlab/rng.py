"""Keyed random streams.

Every random object (a replicate graph, a test configuration) gets its own
generator derived from ``(seed, *key)`` through :class:`numpy.random.SeedSequence`,
so a draw never depends on how many other draws happened before it or on which
thread made them. Within a stream, entities are consumed in a fixed order
(vertex latents first, then pairs in lexicographic order).
"""

from __future__ import annotations

import numpy as np

TWO32 = 1 << 32


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))))


def words(gen: np.random.Generator, count: int) -> np.ndarray:
    """``count`` independent uniform 32-bit words from ``gen``."""
    raw = gen.bit_generator.random_raw((count + 1) // 2)
    return raw.view(np.uint32)[:count]


def thresholds(probs) -> np.ndarray:
    """Map probabilities to uint64 cut points so that ``P(word < t) = t / 2**32``.

    The rounding error is at most ``2**-33`` per probability.
    """
    p = np.asarray(probs, dtype=float)
    return np.rint(np.clip(p, 0.0, 1.0) * TWO32).astype(np.uint64)


def categorical(w: np.ndarray, probs) -> np.ndarray:
    """Inverse-CDF draw of category indices from uniform words."""
    cuts = thresholds(np.cumsum(probs)[:-1])
    return np.searchsorted(cuts, w.astype(np.uint64), side="right").astype(np.intp)
