"""Deterministic text encoders.

The only encoder family built in is ``char-ngram-<dim>``: feature-hashed
character n-grams (1 to 3 characters, with boundary markers) folded into
``dim`` signed buckets and L2-normalized.  It needs no model download,
produces identical float32 vectors on every platform and run, and gives
identical strings identical vectors — which is exactly what the sidecar
consumers require of an embedding source.  Real pretrained encoders can
be added to the registry without touching any consumer.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

from .errors import ModelError
from .tokenizers import word_tokens

_NAME_RE = re.compile(r"^char-ngram-(\d+)$")
_MAX_DIM = 65536
_BOUNDARY_L = "\x02"
_BOUNDARY_R = "\x03"


def _bucket(gram: str, dim: int) -> tuple[int, float]:
    """Stable (index, sign) for one n-gram; blake2b keeps this identical
    across processes, unlike the builtin randomized str hash."""
    digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
    h = int.from_bytes(digest, "little")
    return h % dim, 1.0 if h >> 63 else -1.0


class HashNgramEncoder:
    """Feature-hashed char n-gram encoder with unit-norm output."""

    def __init__(self, name: str, dim: int):
        self.name = name
        self.dim = dim
        self._cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        cached = self._cache.get(token)
        if cached is not None:
            return cached
        marked = _BOUNDARY_L + token + _BOUNDARY_R
        acc = np.zeros(self.dim, dtype=np.float64)
        for n in (1, 2, 3):
            for i in range(len(marked) - n + 1):
                idx, sign = _bucket(marked[i:i + n], self.dim)
                acc[idx] += sign
        norm = float(np.linalg.norm(acc))
        if norm == 0.0:  # all grams cancelled; keep determinism, drop norm
            idx, sign = _bucket(marked, self.dim)
            acc[idx] = sign
            norm = 1.0
        out = (acc / norm).astype(np.float32)
        out.flags.writeable = False
        self._cache[token] = out
        return out

    def encode_tokens(self, tokens: list[str]) -> np.ndarray:
        """One unit vector per token string, shape (len(tokens), dim)."""
        out = np.empty((len(tokens), self.dim), dtype=np.float32)
        for i, tok in enumerate(tokens):
            out[i] = self._token_vector(tok)
        return out

    def encode_paragraph(self, text: str) -> np.ndarray:
        """Unit vector for a whole paragraph: normalized sum of its token
        vectors.  All-whitespace text gets a fixed basis vector so the
        output is still deterministic and finite."""
        tokens = word_tokens(text)
        if not tokens:
            vec = np.zeros(self.dim, dtype=np.float32)
            vec[0] = 1.0
            return vec
        acc = np.zeros(self.dim, dtype=np.float64)
        for tok in tokens:
            acc += self._token_vector(tok.text)
        norm = float(np.linalg.norm(acc))
        if norm == 0.0:
            vec = np.zeros(self.dim, dtype=np.float32)
            vec[0] = 1.0
            return vec
        return (acc / norm).astype(np.float32)


def load_encoder(name: str) -> HashNgramEncoder:
    """Resolve an encoder by name (``char-ngram-<dim>``)."""
    m = _NAME_RE.match(name)
    if not m:
        raise ModelError(f"unknown encoder {name!r}; expected char-ngram-<dim>")
    dim = int(m.group(1))
    if not 1 <= dim <= _MAX_DIM:
        raise ModelError(f"encoder {name!r}: dimension must be in "
                         f"[1, {_MAX_DIM}]")
    return HashNgramEncoder(name, dim)
