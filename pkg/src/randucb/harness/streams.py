"""Hierarchical, key-splittable random streams.

Streams are addressed by a tuple of keys (base seed, replication index, role,
policy label, ...) hashed into a seed sequence, so adding or reordering one
consumer never perturbs another consumer's draws. String keys are digested
with SHA-256, keeping the mapping stable across platforms and processes.
"""

from __future__ import annotations

import hashlib

import numpy as np

ROLE_INSTANCE = 0
ROLE_REWARDS = 1
ROLE_POLICY = 2

_MASK = (1 << 63) - 1


def _key_ints(key) -> list[int]:
    if isinstance(key, (int, np.integer)):
        return [int(key) & _MASK]
    if isinstance(key, str):
        digest = hashlib.sha256(key.encode("utf-8")).digest()
        return [int.from_bytes(digest[:8], "big"), int.from_bytes(digest[8:16], "big")]
    raise TypeError(f"stream keys must be ints or strings, got {type(key).__name__}")


def seed_for(*keys) -> np.random.SeedSequence:
    entropy: list[int] = []
    for key in keys:
        entropy.extend(_key_ints(key))
    return np.random.SeedSequence(entropy)


def stream(*keys) -> np.random.Generator:
    """Generator for the stream addressed by ``keys``."""
    return np.random.default_rng(seed_for(*keys))
