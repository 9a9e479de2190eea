"""Deterministic seed derivation for independent RNG streams."""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(*parts) -> int:
    """Hash an arbitrary tuple of ints/strings into a stable 64-bit seed.

    Keeps RNG streams independent of iteration order: the stream for
    (master_seed, "round", 3, "video_007") never collides with another
    tag tuple and is reproducible across processes and platforms.
    """
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(repr(part).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


def spawn_rng(*parts) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))
