"""Seeding helpers.

Every random draw in the package goes through a Philox4x64-10 counter-based
generator (numpy's ``Philox`` bit generator) keyed by a ``SeedSequence``.
A stream is identified by the master seed plus a tuple of integer keys
(sweep point, realization, retry), so results never depend on the order in
which realizations are evaluated or on the number of workers.
"""

from __future__ import annotations

import numpy as np

RNG_NAME = "numpy.random.Philox (Philox4x64-10) via SeedSequence"


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Return an independent generator for ``(seed, *keys)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(seed) -> np.random.Generator:
    """Accept an int seed, ``None`` or an existing generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        return np.random.Generator(np.random.Philox())
    return stream(seed)
