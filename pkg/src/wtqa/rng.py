"""Seeded random streams.

Every random draw in the package comes from a Philox4x64 generator keyed by
``(seed, *tags)``. Tags name the stream (``"structure"``, ``"rep"``,
``"feedback"``...) and may carry integers such as a replication or unit
index, so any stream can be regenerated on its own regardless of the order
or process in which other streams are consumed.
"""

from __future__ import annotations

import zlib

import numpy as np


def _tag_key(tag) -> int:
    if isinstance(tag, (int, np.integer)):
        if tag < 0:
            raise ValueError("integer stream tags must be nonnegative")
        return int(tag)
    # crc32 is stable across processes and platforms, unlike hash()
    return zlib.crc32(str(tag).encode("utf-8")) + (1 << 32)


def seed_sequence(seed: int, *tags) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed), spawn_key=tuple(_tag_key(t) for t in tags))


def make_rng(seed: int, *tags) -> np.random.Generator:
    """Independent generator for the stream named by ``tags`` under ``seed``."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *tags)))
