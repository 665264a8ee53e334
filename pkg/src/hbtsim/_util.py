"""Small helpers shared by the simulation modules."""

from __future__ import annotations

import numpy as np


def as_rng(seed) -> np.random.Generator:
    """Coerce ``seed`` into a ``numpy.random.Generator``.

    Accepts an existing Generator (returned unchanged), a SeedSequence, an
    integer, or None. Generators created here all use the PCG64 bit stream,
    so a fixed integer seed gives bit-identical draws across runs.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn_seeds(seed, n: int) -> list[np.random.SeedSequence]:
    """Derive ``n`` independent child seeds from one root seed.

    The children depend only on (seed, n-index), never on draw order, which
    keeps parallel work deterministic no matter how it is scheduled.
    """
    if isinstance(seed, np.random.SeedSequence):
        root = seed
    else:
        root = np.random.SeedSequence(seed)
    return root.spawn(n)
