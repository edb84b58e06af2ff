"""Seed derivation shared by every randomized component.

All child seeds are produced by hashing a tuple of non-negative integers
through :class:`numpy.random.SeedSequence`, so that e.g. the topology of
``(size=60, trial=3)`` never depends on which other trials were run.
"""

import numpy as np


def derive_seed(*keys: int) -> int:
    """Mix integer keys into a single 64-bit seed."""
    ss = np.random.SeedSequence([int(k) for k in keys])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(*keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in keys]))
