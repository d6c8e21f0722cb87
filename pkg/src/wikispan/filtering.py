"""Pair filtering by subword length bounds and paragraph-embedding similarity.

Length bounds are inclusive: a pair survives iff both paragraphs have a
subword count in [min_subwords, max_subwords]. The similarity gate is
strict: cosine must exceed the threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping

import numpy as np

from .errors import ConfigError, DataError, ValidationError
from .pairing import ParagraphPair

# Script ranges written without word spaces; texts dominated by these are
# counted per scalar value instead of per whitespace token.
_NO_SPACE_RANGES = (
    (0x3400, 0x4DBF),   # CJK ext A
    (0x4E00, 0x9FFF),   # CJK unified
    (0x3040, 0x309F),   # hiragana
    (0x30A0, 0x30FF),   # katakana
    (0xF900, 0xFAFF),   # CJK compatibility
    (0x0E00, 0x0E7F),   # Thai
    (0x0E80, 0x0EFF),   # Lao
    (0x1000, 0x109F),   # Myanmar
    (0x1780, 0x17FF),   # Khmer
)


@dataclass
class FilterConfig:
    min_subwords: int = 30
    max_subwords: int = 158
    sim_threshold: float = 0.75

    def __post_init__(self) -> None:
        if not (0 < self.min_subwords <= self.max_subwords):
            raise ConfigError(
                f"need 0 < min_subwords <= max_subwords, got "
                f"({self.min_subwords}, {self.max_subwords})")
        if not np.isfinite(self.sim_threshold):
            raise ConfigError("sim_threshold must be finite")


def _has_no_space_script(text: str) -> bool:
    for ch in text:
        cp = ord(ch)
        for lo, hi in _NO_SPACE_RANGES:
            if lo <= cp <= hi:
                return True
    return False


def fallback_subword_count(text: str) -> int:
    """Counter used when no tokenizer sidecar is available.

    Whitespace tokens for space-delimited scripts; non-whitespace scalar
    values otherwise.
    """
    if _has_no_space_script(text):
        return sum(1 for ch in text if not ch.isspace())
    return len(text.split())


def subword_count(text: str, counter: Callable[[str], int] | None = None,
                  *, paragraph_id: str = "?") -> int:
    """Count subwords with a pluggable counter (fallback counter by default)."""
    if not text:
        raise ValidationError("cannot count subwords of empty text",
                              record_id=paragraph_id, field="text")
    counter = counter or fallback_subword_count
    try:
        n = int(counter(text))
    except Exception as exc:
        raise DataError(f"subword counter failed for paragraph {paragraph_id!r}: {exc}") from exc
    return max(n, 1)


def length_filter(pair: ParagraphPair, counts: Mapping[str, int],
                  cfg: FilterConfig) -> bool:
    """Keep iff both sides are within [min_subwords, max_subwords]."""
    for pid in (pair.src_id, pair.tgt_id):
        if pid not in counts:
            raise DataError(f"no subword count for paragraph {pid!r}")
        if not (cfg.min_subwords <= counts[pid] <= cfg.max_subwords):
            return False
    return True


def cosine(u, v) -> float:
    """Cosine similarity with 64-bit accumulation, clamped to [-1, 1]."""
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DataError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise DataError("cosine of a zero vector is undefined")
    sim = float(np.dot(a, b)) / (na * nb)
    return min(1.0, max(-1.0, sim))


def similarity_filter(pair: ParagraphPair, embs: Mapping[str, np.ndarray],
                      cfg: FilterConfig) -> bool:
    """Keep iff cosine similarity strictly exceeds the threshold."""
    for pid in (pair.src_id, pair.tgt_id):
        if pid not in embs:
            raise DataError(f"no embedding for paragraph {pid!r}")
    return cosine(embs[pair.src_id], embs[pair.tgt_id]) > cfg.sim_threshold


def filter_pair_stream(
    pairs: Iterable[ParagraphPair],
    counts: Mapping[str, int],
    embs: Mapping[str, np.ndarray],
    cfg: FilterConfig,
    counters: dict | None = None,
) -> Iterator[ParagraphPair]:
    """Apply length then similarity filtering, tallying drops per stage."""
    for pair in pairs:
        if not length_filter(pair, counts, cfg):
            if counters is not None:
                counters["dropped_length"] = counters.get("dropped_length", 0) + 1
            continue
        if not similarity_filter(pair, embs, cfg):
            if counters is not None:
                counters["dropped_similarity"] = counters.get("dropped_similarity", 0) + 1
            continue
        if counters is not None:
            counters["kept"] = counters.get("kept", 0) + 1
        yield pair
