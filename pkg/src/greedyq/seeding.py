"""Reproducible stream splitting for all stochastic estimation.

Every random draw in the package flows from a single 64-bit seed through
``rng_for(seed, *key)``.  The key is a tuple of small integers naming the
consumer (level index, role, replication, ...).  Streams are derived with
``numpy.random.SeedSequence(seed, spawn_key=key)``, so the mapping from
(seed, key) to stream is a pure function: it does not depend on call order,
worker count, or how many other streams were derived first.
"""

from __future__ import annotations

import numpy as np

# Role codes used by the stochastic builders; kept here so that the full
# derivation tree is documented in one place.
ROLE_START = 0      # level start-point candidate batch
ROLE_SWEEP = 1      # randomized-Lloyd sweep batches / CLVQ stimulus stream
ROLE_EVAL = 2       # shared distortion-evaluation batch
ROLE_STATIONARITY = 3  # post-fit stationarity check batch
ROLE_GENERIC = 7    # one-off estimations (voronoi weights, distortion_mc)


def rng_for(seed: int, *key: int) -> np.random.Generator:
    """Return the deterministic generator for (seed, key)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))
