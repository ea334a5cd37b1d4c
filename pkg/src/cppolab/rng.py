"""Seeded, named random streams.

Every consumer (env, policy init, minibatch shuffle, solver fuzz, ...) draws
from its own Philox stream derived from the run seed and the consumer name,
so adding draws in one place never perturbs another.
"""
import zlib

import numpy as np


def stream(seed: int, name: str) -> np.random.Generator:
    key = zlib.crc32(name.encode("utf-8"))
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(key,))
    return np.random.Generator(np.random.Philox(ss))
