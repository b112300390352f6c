"""Seed handling shared by every stochastic routine."""
from __future__ import annotations

from typing import Union

import numpy as np

SeedLike = Union[None, int, np.random.SeedSequence, np.random.Generator]


def as_generator(seed: SeedLike) -> np.random.Generator:
    """Return ``seed`` itself if it is a Generator, else a fresh PCG64 from it.

    Passing a Generator lets callers chain several stochastic stages on one
    stream.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def child_seeds(seed, n: int) -> list[np.random.SeedSequence]:
    if isinstance(seed, np.random.SeedSequence):
        ss = seed
    elif isinstance(seed, (list, tuple)):
        ss = np.random.SeedSequence(list(seed))
    else:
        ss = np.random.SeedSequence(seed)
    return ss.spawn(n)
