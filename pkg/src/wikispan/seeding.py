"""Deterministic seed derivation: one global seed, independent per-stage streams."""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(*parts: object) -> int:
    """Hash (seed, stage name, ...) into a stable 64-bit seed."""
    key = ":".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "little")


def make_rng(*parts: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))
