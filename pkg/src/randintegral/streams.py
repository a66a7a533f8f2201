"""Reproducible random streams keyed by ``(seed, stream id)``.

Each key maps to an independent counter-based Philox generator derived
through :class:`numpy.random.SeedSequence`, so streams can be generated in
any order or in parallel without changing their contents.
"""

from __future__ import annotations

import secrets

import numpy as np

from .errors import InvalidInputError

SEED_BITS = 64

# domain tags keep the product-law sampler, the path simulator and the
# verification suites apart
SAMPLER = 0
PATHS = 1
VERIFY = 2


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise InvalidInputError(f"seed {seed!r} must be an integer")
    seed = int(seed)
    if not 0 <= seed < 2**SEED_BITS:
        raise InvalidInputError(f"seed {seed} must be in [0, 2**64)")
    return seed


def fresh_seed() -> int:
    return secrets.randbits(SEED_BITS)


def generator(seed: int, stream: int = 0, domain: int = SAMPLER) -> np.random.Generator:
    seed = check_seed(seed)
    if stream < 0:
        raise InvalidInputError(f"stream id {stream} must be nonnegative")
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(domain, int(stream)))
    return np.random.Generator(np.random.Philox(seq))
