"""Seeded, splittable random streams.

Every random consumer derives its generator from ``(seed, role, index)`` so the
draws made for one Bob do not depend on how many other Bobs exist.
"""
from __future__ import annotations

import numpy as np

ALICE = 0
BOB = 1
CLASSICAL = 2


def stream(seed: int, role: int, index: int = 0) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(role, index))
    return np.random.Generator(np.random.PCG64(seq))
