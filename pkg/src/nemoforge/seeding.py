"""Splittable deterministic randomness.

All sampling in the toolkit flows from one integer seed. Independent
streams are derived by hashing the seed together with string keys, so
adding a stream (or running items in a different order) never perturbs
the draws of another stream.
"""

from __future__ import annotations

import hashlib
import random


def derive_seed(seed: int, *streams: object) -> int:
    """Derive a child seed from `seed` and a sequence of stream keys."""
    h = hashlib.sha256()
    h.update(str(int(seed)).encode("utf-8"))
    for key in streams:
        h.update(b"\x1f")
        h.update(str(key).encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "big")


def derive_rng(seed: int, *streams: object) -> random.Random:
    """A random.Random seeded from the (seed, *streams) stream key."""
    return random.Random(derive_seed(seed, *streams))


def stable_digest(*parts: object, length: int = 12) -> str:
    """Short stable hex digest used to mint deterministic record ids."""
    h = hashlib.sha256()
    for part in parts:
        h.update(str(part).encode("utf-8"))
        h.update(b"\x1f")
    return h.hexdigest()[:length]
