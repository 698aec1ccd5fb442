# Filename: rng_model.py

"""Named, replayable random streams derived from one root seed."""

from enum import IntEnum

import numpy as np

RNG_ALGORITHM = "numpy.PCG64"


class Stream(IntEnum):
    """Fixed stream identifiers. Never renumber: reports depend on them."""

    ACTIVATION_ORDERS = 0
    SEED_SELECTION = 1
    OPT_LOWER = 2
    COLLECTION = 3
    EVALUATION = 4
    ORACLE_CHECK = 5
    PROBABILITIES = 6


def seed_sequence(root_seed: int, stream: Stream, *path: int) -> np.random.SeedSequence:
    """SeedSequence of a named stream, optionally refined by an integer path (trial, chunk, ...)"""

    return np.random.SeedSequence(int(root_seed), spawn_key=(int(stream),) + tuple(int(p) for p in path))


def generator(root_seed: int, stream: Stream, *path: int) -> np.random.Generator:
    """PCG64 generator for a named stream"""

    return np.random.Generator(np.random.PCG64(seed_sequence(root_seed, stream, *path)))


def derive_int(root_seed: int, stream: Stream, *path: int) -> int:
    """A 63-bit integer seed for components that take plain integer seeds (networkx, frozen tuple seeds)"""

    return int(seed_sequence(root_seed, stream, *path).generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
