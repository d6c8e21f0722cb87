"""Word tokenization with character spans, and subword-count models.

All exports in this package share one word tokenizer so that token spans
are parallel across the token-embedding and POS sidecars produced from
the same input.  Spans are 0-based character offsets, inclusive on both
ends, sorted, and non-overlapping by construction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from .errors import ModelError

# runs of word characters, or a single non-word non-space character —
# every non-whitespace character lands in exactly one token
_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


@dataclass(frozen=True)
class Token:
    text: str
    start: int  # first character, 0-based
    end: int    # last character, inclusive


def word_tokens(text: str) -> list[Token]:
    """Split *text* into word/punctuation tokens with character spans."""
    return [Token(m.group(), m.start(), m.end() - 1)
            for m in _TOKEN_RE.finditer(text)]


def _count_words(text: str) -> int:
    return len(word_tokens(text))


def _count_chunk4(text: str) -> int:
    """Words broken into 4-character chunks; punctuation counts as one
    piece.  A cheap stand-in for a learned subword vocabulary: long words
    cost proportionally more pieces."""
    total = 0
    for tok in word_tokens(text):
        total += -(-len(tok.text) // 4)  # ceil division
    return total


_COUNTERS: dict[str, Callable[[str], int]] = {
    "words": _count_words,
    "chunk4": _count_chunk4,
}


def load_counter(name: str) -> Callable[[str], int]:
    """Resolve a subword-count model by name."""
    try:
        return _COUNTERS[name]
    except KeyError:
        raise ModelError(
            f"unknown subword tokenizer {name!r}; "
            f"available: {', '.join(sorted(_COUNTERS))}") from None
