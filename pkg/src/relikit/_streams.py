"""Seeded substream derivation.

All randomness in the package flows through ``substream``: a 64-bit seedable
generator (PCG64) keyed by a root seed plus a tuple of small integer stream
keys. Distinct keys give statistically independent streams, so candidate-pool
generation, pool growth, LHS permutations, training-point selection, MLE
multistarts and Monte-Carlo quantile draws never share state. Stream keys
used by the engines:

==============  ===========================================
key             purpose
==============  ===========================================
SK_POOL         initial candidate pool (LHS)
SK_GROWTH, k    k-th pool increment (plain sampling)
SK_INIT_TRAIN   initial training-point selection
SK_FIT, j       j-th hyperparameter fit (multistart draws)
SK_ERROR_MC, i  Monte-Carlo quantile draws at checkpoint i
==============  ===========================================
"""
from __future__ import annotations

import numpy as np

SK_POOL = 1
SK_GROWTH = 2
SK_INIT_TRAIN = 3
SK_FIT = 4
SK_ERROR_MC = 5

SeedLike = "int | tuple[int, ...]"


def _as_key(seed) -> list[int]:
    if isinstance(seed, (tuple, list)):
        return [int(s) for s in seed]
    return [int(seed)]


def substream(seed, *key: int) -> np.random.Generator:
    """Return a fresh generator for (seed, \\*key).

    The same (seed, key) combination always produces the same stream;
    different keys produce independent streams.
    """
    return np.random.default_rng(np.random.SeedSequence(_as_key(seed) + [int(k) for k in key]))
