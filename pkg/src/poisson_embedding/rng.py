"""Random-state plumbing shared by every sampler.

Streams are derived with :class:`numpy.random.SeedSequence`: the master seed is
the entropy and a tuple of small integers (experiment code, task index, ...) is
the spawn key.  SeedSequence hashes both through its mixing function, so the
stream a task sees depends only on ``(master_seed, key)`` and never on which
worker happens to run it.
"""

from __future__ import annotations

import numpy as np

_TWO_M53 = 2.0**-53


def derive_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Return an independent PCG64 generator for ``(master_seed, key)``."""
    if not 0 <= master_seed < 2**64:
        raise ValueError(f"master seed must be an unsigned 64-bit integer, got {master_seed}")
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def open_uniform(rng: np.random.Generator, size=None):
    """Uniform draws on the open interval (0, 1).

    Uses the top 53 bits of a raw 64-bit word offset by one half, so both 0 and 1
    are unreachable and ``-log(u)`` is always finite.
    """
    k = rng.integers(0, 2**53, size=size, dtype=np.uint64)
    return (k + 0.5) * _TWO_M53


def exponential(rng: np.random.Generator, rate: float, size=None):
    """Inverse-transform exponential draws ``-log(U) / rate``."""
    return -np.log(open_uniform(rng, size)) / rate


def standard_normal(rng: np.random.Generator, size=None):
    # numpy's ziggurat on a fixed bit generator; stable across platforms for a
    # given numpy release.
    return rng.standard_normal(size)
