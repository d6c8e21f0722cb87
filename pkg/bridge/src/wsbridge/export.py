"""The four export operations.

Each one resolves a model by name, runs it over the input paragraphs in
batches, and writes a single sidecar file in input order.  Exports never
filter, score, or align — they only serialize raw model outputs.  Given
the same model name and input file, every export is byte-deterministic.
"""

from __future__ import annotations

from typing import Iterator, Sequence

from . import sidecar_io
from .encoders import load_encoder
from .sidecar_io import InputParagraph
from .tagger import load_tagger
from .tokenizers import load_counter, word_tokens

DEFAULT_ENCODER = "char-ngram-64"
DEFAULT_TAGGER = "rule-en"
DEFAULT_COUNTER = "chunk4"
DEFAULT_BATCH_SIZE = 32


def _batches(items: Sequence, size: int) -> Iterator[Sequence]:
    for lo in range(0, len(items), size):
        yield items[lo:lo + size]


def export_token_embeddings(paragraphs: list[InputParagraph], model: str,
                            out: str,
                            batch_size: int = DEFAULT_BATCH_SIZE) -> dict:
    """Token character spans plus one vector per token, binary sidecar."""
    encoder = load_encoder(model)
    records = []
    n_tokens = 0
    for batch in _batches(paragraphs, batch_size):
        for para in batch:
            tokens = word_tokens(para.text)
            vectors = encoder.encode_tokens([t.text for t in tokens])
            records.append(
                (para.id, [(t.start, t.end) for t in tokens], vectors))
            n_tokens += len(tokens)
    sidecar_io.write_token_vectors(out, encoder.dim, records)
    return {"paragraphs": len(records), "tokens": n_tokens,
            "dim": encoder.dim}


def export_paragraph_embeddings(paragraphs: list[InputParagraph], model: str,
                                out: str,
                                batch_size: int = DEFAULT_BATCH_SIZE) -> dict:
    """One vector per paragraph, binary sidecar."""
    encoder = load_encoder(model)
    records = []
    for batch in _batches(paragraphs, batch_size):
        records.extend((para.id, encoder.encode_paragraph(para.text))
                       for para in batch)
    sidecar_io.write_paragraph_vectors(out, encoder.dim, records)
    return {"paragraphs": len(records), "dim": encoder.dim}


def export_pos_tags(paragraphs: list[InputParagraph], model: str, out: str,
                    batch_size: int = DEFAULT_BATCH_SIZE) -> dict:
    """Token spans and POS tags, JSONL sidecar.  Spans come from the same
    tokenizer as the token-embedding export, so the two stay parallel."""
    tagger = load_tagger(model)
    records = []
    n_tokens = 0
    for batch in _batches(paragraphs, batch_size):
        for para in batch:
            tokens, tags = tagger.tag_text(para.text)
            records.append(
                (para.id, [(t.start, t.end) for t in tokens], tags))
            n_tokens += len(tokens)
    sidecar_io.write_pos_jsonl(out, records)
    return {"paragraphs": len(records), "tokens": n_tokens}


def export_subword_counts(paragraphs: list[InputParagraph], model: str,
                          out: str,
                          batch_size: int = DEFAULT_BATCH_SIZE) -> dict:
    """One subword count per paragraph id, JSONL sidecar."""
    counter = load_counter(model)
    records = []
    for batch in _batches(paragraphs, batch_size):
        records.extend((para.id, counter(para.text)) for para in batch)
    sidecar_io.write_counts_jsonl(out, records)
    return {"paragraphs": len(records)}
