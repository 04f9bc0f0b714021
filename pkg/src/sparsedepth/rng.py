"""Reproducible random number generation.

All randomness in the package flows through Philox, a counter-based
generator, so that a (seed, stream) pair produces the same draws on every
platform.  Independent streams for Monte-Carlo trials are derived by
varying the stream index while keeping the base seed fixed.
"""

import numpy as np

__all__ = ["make_rng", "split_seed"]


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Return a Generator backed by Philox with key (seed, stream)."""
    if seed is None:
        raise ValueError("seed must be an integer, not None")
    return np.random.Generator(np.random.Philox(key=[int(seed) & (2**64 - 1),
                                                     int(stream) & (2**64 - 1)]))


def split_seed(base_seed: int, index: int) -> tuple[int, int]:
    """Derive the (seed, stream) pair for the index-th independent stream."""
    return int(base_seed), int(index)
