"""
Random number plumbing.

All randomness goes through numpy's PCG64 bit generator seeded from a
SeedSequence. Trial t of a run with master seed s uses the stream
SeedSequence(s, spawn_key=(t,)), so any trial can be replayed on its own.
"""

from typing import Union

import numpy as np

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]


def make_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def trial_seed(seed: int, trial_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed), spawn_key=(int(trial_index),))


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return make_rng(trial_seed(seed, trial_index))


def complex_normal(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Circular complex Gaussian samples with E|x|^2 = variance."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
