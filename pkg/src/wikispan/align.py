"""Bidirectional word alignment from span predictions.

For each source word, the model predicts a character span in the target
sentence; the span is mapped back onto target words, and the best-span
score becomes the alignment probability for every covered word.  Running
both directions, averaging and thresholding yields the final symmetric
word alignment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .annotate import mark_span
from .errors import DataError, ParseError, ValidationError
from .spanpred.encoder import ModelParams, forward, pack_ids
from .spanpred.ops import best_span, distributions_from_logits, span_score

DEFAULT_THRESHOLD = 0.4

WordBoundaries = list  # list of (start, end) inclusive character spans


def validate_boundaries(bounds: Sequence[tuple[int, int]], text: str) -> None:
    prev_end = -1
    for n, (s, e) in enumerate(bounds):
        if not (0 <= s <= e < len(text)):
            raise ValidationError(
                f"word boundary ({s}, {e}) out of range for text of length {len(text)}")
        if s <= prev_end:
            raise ValidationError(
                f"word boundary {n} overlaps or precedes its predecessor")
        prev_end = e


def whitespace_boundaries(text: str) -> list[tuple[int, int]]:
    """Inclusive character spans of whitespace-separated tokens."""
    bounds = []
    pos = 0
    for piece in text.split():
        start = text.index(piece, pos)
        bounds.append((start, start + len(piece) - 1))
        pos = start + len(piece)
    return bounds


def boundaries_from_tokens(tokens: Sequence[str]) -> list[tuple[int, int]]:
    """Spans of tokens joined by single spaces."""
    bounds = []
    pos = 0
    for tok in tokens:
        if not tok:
            raise ValidationError("empty token in tokenized sentence")
        bounds.append((pos, pos + len(tok) - 1))
        pos += len(tok) + 1
    return bounds


@dataclass
class TokenAlignmentMatrix:
    """Alignment probabilities: rows = source words, cols = target words."""

    probs: np.ndarray
    direction: str

    def __post_init__(self) -> None:
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.probs.ndim != 2:
            raise ValidationError("alignment matrix must be 2-d")
        if self.probs.size and (self.probs.min() < 0 or self.probs.max() > 1):
            raise ValidationError("alignment probabilities must lie in [0, 1]")

    @property
    def shape(self) -> tuple[int, int]:
        return self.probs.shape


def map_span_to_words(span: tuple[int, int],
                      boundaries: Sequence[tuple[int, int]]) -> list[int]:
    """Words fully contained in the character span.

    Returns the longest contiguous run of fully-contained words starting
    from the first such word; empty when no word is fully contained.
    """
    k, l = span
    if k > l:
        raise ValidationError(f"invalid span ({k}, {l})")
    contained = [w for w, (s, e) in enumerate(boundaries) if k <= s and e <= l]
    if not contained:
        return []
    run = [contained[0]]
    for w in contained[1:]:
        if w == run[-1] + 1:
            run.append(w)
        else:
            break
    return run


STRATEGIES = ("best-span-uniform",)


def token_prob_matrix(params: ModelParams, x: str, y: str,
                      x_bounds: Sequence[tuple[int, int]],
                      y_bounds: Sequence[tuple[int, int]],
                      strategy: str = "best-span-uniform",
                      min_score: float = 0.0) -> TokenAlignmentMatrix:
    """Directional alignment probabilities from source words to target words.

    For each source word, the model's best predicted span in ``y`` is
    mapped to target words; the span score is assigned as-is to every
    covered word (the ``best-span-uniform`` strategy).  A null best span
    leaves the row all-zero.
    """
    if strategy not in STRATEGIES:
        raise ValidationError(f"unknown alignment strategy {strategy!r}")
    validate_boundaries(x_bounds, x)
    validate_boundaries(y_bounds, y)
    mat = np.zeros((len(x_bounds), len(y_bounds)))
    if not x_bounds or not y_bounds:
        return TokenAlignmentMatrix(mat, "x->y")

    # Group source words by packed length so each group runs as one batch.
    packed = []
    for p, (i, j) in enumerate(x_bounds):
        try:
            ids, y_start = pack_ids(params, mark_span(x, i, j), y)
        except (DataError, ValidationError) as err:
            raise DataError(f"source word {p} ({i}, {j}): {err}") from err
        packed.append((p, ids, y_start))
    by_len: dict[int, list[tuple[int, np.ndarray, int]]] = {}
    for item in packed:
        by_len.setdefault(item[1].size, []).append(item)

    for size, group in sorted(by_len.items()):
        ids = np.stack([g[1] for g in group])
        mask = np.ones(ids.shape, dtype=np.uint8)
        out = forward(params, ids, mask)
        for row, (p, _, y_start) in enumerate(group):
            sl = out.start_logits[row, y_start:y_start + len(y)]
            el = out.end_logits[row, y_start:y_start + len(y)]
            dist = distributions_from_logits(sl, el)
            best = best_span(dist, min_score)
            if best is None:
                continue
            k, l = best
            score = span_score(dist, k, l)
            for q in map_span_to_words((k, l), y_bounds):
                mat[p, q] = score
    return TokenAlignmentMatrix(mat, "x->y")


def symmetrize(m_xy: TokenAlignmentMatrix,
               m_yx: TokenAlignmentMatrix) -> TokenAlignmentMatrix:
    """Average the two directions: out[p][q] = (xy[p][q] + yx[q][p]) / 2."""
    if m_yx.shape != (m_xy.shape[1], m_xy.shape[0]):
        raise DataError(
            f"direction shapes incompatible: {m_xy.shape} vs {m_yx.shape}")
    return TokenAlignmentMatrix((m_xy.probs + m_yx.probs.T) / 2.0, "sym")


def extract_alignment(sym: TokenAlignmentMatrix,
                      threshold: float = DEFAULT_THRESHOLD) -> set[tuple[int, int]]:
    """All word pairs whose averaged probability strictly exceeds the threshold."""
    rows, cols = np.where(sym.probs > threshold)
    return {(int(p), int(q)) for p, q in zip(rows, cols)}


def align_pair(params: ModelParams, src_tokens: Sequence[str],
               tgt_tokens: Sequence[str], threshold: float = DEFAULT_THRESHOLD,
               strategy: str = "best-span-uniform",
               min_score: float = 0.0) -> set[tuple[int, int]]:
    """Full bidirectional alignment of one tokenized sentence pair."""
    x = " ".join(src_tokens)
    y = " ".join(tgt_tokens)
    xb = boundaries_from_tokens(src_tokens)
    yb = boundaries_from_tokens(tgt_tokens)
    m_xy = token_prob_matrix(params, x, y, xb, yb, strategy, min_score)
    m_yx = token_prob_matrix(params, y, x, yb, xb, strategy, min_score)
    return extract_alignment(symmetrize(m_xy, m_yx), threshold)


def load_sentence_pairs(path: str) -> list[tuple[list[str], list[str]]]:
    """Read tab-separated sentence pairs with space-separated tokens."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.count("\t") != 1:
                raise ParseError(
                    f"{path}: expected exactly one tab separator", line=n)
            src, tgt = line.split("\t")
            src_tokens = src.split()
            tgt_tokens = tgt.split()
            if not src_tokens or not tgt_tokens:
                raise ParseError(f"{path}: empty sentence side", line=n)
            pairs.append((src_tokens, tgt_tokens))
    return pairs


def write_pharaoh(alignments: Iterable[set[tuple[int, int]]], path: str) -> int:
    """One line per sentence pair: space-separated "p-q" tokens, sorted."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for aset in alignments:
            fh.write(" ".join(f"{p}-{q}" for p, q in sorted(aset)))
            fh.write("\n")
            count += 1
    return count
