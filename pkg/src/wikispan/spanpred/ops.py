"""Span probability operations on top of the encoder.

All probabilities here are float64 regardless of the model dtype; spans
are 0-based inclusive (k, l) positions into the target text.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..annotate import mark_span
from ..errors import DataError
from .encoder import ModelParams, forward, pack_ids

PROB_FLOOR = 1e-12


@dataclass
class SpanDistribution:
    """Start/end position distributions over one target text."""

    p_start: np.ndarray  # (n,) float64, sums to 1
    p_end: np.ndarray    # (n,) float64, sums to 1

    def __post_init__(self) -> None:
        self.p_start = np.asarray(self.p_start, dtype=np.float64)
        self.p_end = np.asarray(self.p_end, dtype=np.float64)
        if self.p_start.ndim != 1 or self.p_start.shape != self.p_end.shape:
            raise DataError("start/end distributions must be 1-d and equal length")
        if self.p_start.size == 0:
            raise DataError("empty span distribution")

    @property
    def size(self) -> int:
        return int(self.p_start.size)


def softmax64(logits: np.ndarray) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def distributions_from_logits(start_logits, end_logits) -> SpanDistribution:
    return SpanDistribution(softmax64(start_logits), softmax64(end_logits))


def segment_log_softmax(logits: np.ndarray, seg_mask: np.ndarray) -> np.ndarray:
    """Row-wise log-softmax restricted to seg_mask == 1; -inf elsewhere.

    logits: (B, L); returns float64 (B, L).
    """
    z = np.where(seg_mask.astype(bool), logits.astype(np.float64), -np.inf)
    m = z.max(axis=1, keepdims=True)
    e = np.exp(z - m)
    lse = np.log(e.sum(axis=1, keepdims=True)) + m
    return z - lse


def encode(params: ModelParams, x: str, y: str, i: int, j: int) -> np.ndarray:
    """Final hidden states for the target positions of one marked pair.

    Marks span (i, j) of ``x``, packs with ``y`` and returns the (len(y),
    embed_dim) block of final-layer-norm outputs covering ``y``.
    """
    marked = mark_span(x, i, j)
    ids, y_start = pack_ids(params, marked, y)
    mask = np.ones((1, ids.size), dtype=np.uint8)
    out = forward(params, ids[None, :], mask)
    return out.hidden[0, y_start:y_start + len(y)]


def span_distributions(params: ModelParams, x: str, y: str, i: int, j: int) -> SpanDistribution:
    """Start/end distributions over the characters of ``y`` for the marked
    span (i, j) of ``x``; softmax runs over target positions only."""
    marked = mark_span(x, i, j)
    ids, y_start = pack_ids(params, marked, y)
    mask = np.ones((1, ids.size), dtype=np.uint8)
    out = forward(params, ids[None, :], mask)
    sl = out.start_logits[0, y_start:y_start + len(y)]
    el = out.end_logits[0, y_start:y_start + len(y)]
    return distributions_from_logits(sl, el)


def _check_span(dist: SpanDistribution, k: int, l: int) -> None:
    if not (0 <= k <= l < dist.size):
        raise DataError(
            f"span ({k}, {l}) out of range for target of length {dist.size}")


def span_score(dist: SpanDistribution, k: int, l: int) -> float:
    """w = p_start(k) * p_end(l) for a candidate span."""
    _check_span(dist, k, l)
    return float(dist.p_start[k] * dist.p_end[l])


def best_span(dist: SpanDistribution, min_score: float = 0.0):
    """Highest-scoring admissible span (k <= l), or None when the best
    score falls strictly below ``min_score``.

    Ties resolve to the smallest k, then the smallest l.
    """
    outer = np.outer(dist.p_start, dist.p_end)
    outer = np.triu(outer)  # forbid l < k
    flat = int(np.argmax(outer))  # row-major scan => smallest k, then l
    k, l = divmod(flat, dist.size)
    if outer[k, l] < min_score:
        return None
    return int(k), int(l)


def span_loss(dist: SpanDistribution, k: int, l: int, clamp: bool = False) -> float:
    """-(log p_start(k) + log p_end(l)), evaluated in log space.

    A zero gold probability raises unless ``clamp`` floors it at 1e-12.
    """
    _check_span(dist, k, l)
    ps = float(dist.p_start[k])
    pe = float(dist.p_end[l])
    if clamp:
        ps = max(ps, PROB_FLOOR)
        pe = max(pe, PROB_FLOOR)
    elif ps <= 0.0 or pe <= 0.0:
        raise DataError(
            f"zero probability at gold span ({k}, {l}); "
            "enable clamping to floor it at 1e-12")
    return float(-(np.log(ps) + np.log(pe)))
