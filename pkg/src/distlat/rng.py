"""Seed handling: one 64-bit master seed, independent per-replica streams."""

import numpy as np


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def replica_seed(seed: int, replica: int, *tags: int) -> np.random.SeedSequence:
    """Stream for replica ``replica`` of master ``seed``.

    SeedSequence hashes (entropy, spawn_key), so streams for different
    replicas are independent and do not depend on evaluation order.
    """
    return np.random.SeedSequence(int(seed), spawn_key=(int(replica),) + tuple(int(t) for t in tags))


def replica_rng(seed: int, replica: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng(replica_seed(seed, replica, *tags))


def derived_seed(seed: int, replica: int, *tags: int) -> int:
    """A plain 64-bit integer seed derived from (seed, replica, tags)."""
    return int(replica_seed(seed, replica, *tags).generate_state(1, np.uint64)[0])
