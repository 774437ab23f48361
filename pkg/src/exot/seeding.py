"""Deterministic, splittable random streams.

Every stochastic operation in the library takes an explicit seed. Streams are
PCG64 generators keyed by numpy ``SeedSequence`` spawn keys, so a (seed, key...)
pair names one reproducible stream and substreams never collide.
"""

from __future__ import annotations

import numpy as np

SeedLike = "int | np.random.SeedSequence"


def seed_sequence(seed, *key: int) -> np.random.SeedSequence:
    """Derive the SeedSequence for stream ``key`` under ``seed``.

    ``seed`` may be an integer or an existing SeedSequence; extra integers
    select a deterministic substream.
    """
    if isinstance(seed, np.random.SeedSequence):
        if not key:
            return seed
        return np.random.SeedSequence(
            entropy=seed.entropy, spawn_key=(*seed.spawn_key, *key)
        )
    return np.random.SeedSequence(entropy=int(seed), spawn_key=key)


def rng(seed, *key: int) -> np.random.Generator:
    """PCG64 generator for stream ``key`` under ``seed``."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *key)))
