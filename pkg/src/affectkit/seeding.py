"""Deterministic named substreams from one root seed.

hashlib-based (not Python hash()) so the same (root, tags) pair yields the
same stream on every platform and process.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(root: int, *tags) -> int:
    """A 63-bit seed unique to (root, tags)."""
    text = "affectkit:" + str(int(root)) + ":" + ":".join(str(t) for t in tags)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def substream(root: int, *tags) -> np.random.Generator:
    """Generator seeded by :func:`derive_seed`."""
    return np.random.default_rng(derive_seed(root, *tags))
