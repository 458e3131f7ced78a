"""Seed derivation helpers.

Every stochastic component draws from its own generator derived from the
master seed and a stable key (stage name, grid index, sample count, ...), so a
component can be re-run in isolation and produce the same stream.
"""

import zlib

import numpy as np

SeedLike = int | np.random.Generator | None


def _key_to_int(key: int | str) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    return int(key)


def derive_seed(master: int, *keys: int | str) -> int:
    """Derive a 63-bit child seed from a master seed and a key path.

    Args:
        master: Master seed of the run
        keys: Stable identifiers of the consumer (names or indices)

    Returns:
        Non-negative integer seed
    """
    entropy = [int(master) & 0xFFFFFFFFFFFFFFFF, *(_key_to_int(k) for k in keys)]
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))


def derive_rng(master: int, *keys: int | str) -> np.random.Generator:
    """Create a generator seeded from `derive_seed(master, *keys)`."""
    return np.random.default_rng(derive_seed(master, *keys))


def as_generator(seed: SeedLike) -> np.random.Generator:
    """Accept a seed or an existing generator (passed through unchanged)."""
    return np.random.default_rng(seed)
