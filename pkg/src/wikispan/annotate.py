"""Weak-supervision alignment annotation.

Two sources of labels are produced per paragraph pair: shared-entity
mention spans ("wiki" examples) and mutual-argmax matches over contextual
token embeddings gated by POS tags ("common" examples). Both directions of
every alignment are materialized as separate examples, then merged into one
dataset and emitted as SQuAD-style span-prediction records.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from .corpus import Paragraph
from .errors import ConfigError, DataError, ValidationError
from .pairing import ParagraphPair
from .seeding import make_rng
from .sidecars import PosTags, TokenEmbeddings

DATASET_VERSION = "wsp-1"
MARKER = "¶"  # pilcrow delimiting the queried source span

# POS tags whose tokens count as common words; an alignment is kept when at
# least one side carries one of these.
COMMON_TAGS = frozenset({
    "ADJ", "VERB", "DET", "ADP", "AUX", "PRON", "PART",
    "SCONJ", "NUM", "NOUN", "ADV", "CCONJ", "INTJ",
})


@dataclass(frozen=True)
class AlignmentExample:
    """One weakly-supervised record: align src_span in src_text to tgt_span."""

    src_id: str
    tgt_id: str
    kind: str                     # "wiki" | "common"
    src_text: str
    tgt_text: str
    src_span: tuple[int, int]     # (i, j) inclusive character offsets
    tgt_span: tuple[int, int]     # (k, l) inclusive character offsets
    entity_id: str | None = None  # set for kind == "wiki"


def validate_example(ex: AlignmentExample) -> None:
    i, j = ex.src_span
    k, l = ex.tgt_span
    if not (0 <= i <= j < len(ex.src_text)):
        raise ValidationError(f"source span ({i}, {j}) out of bounds",
                              field="src_span", record_id=ex.src_id)
    if not (0 <= k <= l < len(ex.tgt_text)):
        raise ValidationError(f"target span ({k}, {l}) out of bounds",
                              field="tgt_span", record_id=ex.tgt_id)
    if ex.kind not in ("wiki", "common"):
        raise ValidationError(f"unknown kind {ex.kind!r}", field="kind")


def mark_span(text: str, i: int, j: int) -> str:
    """Insert the span marker around [i, j] with single surrounding spaces."""
    if not (0 <= i <= j < len(text)):
        raise ValidationError(f"span ({i}, {j}) out of bounds for marking")
    left = text[:i].rstrip(" ")
    right = text[j + 1:].lstrip(" ")
    parts = [p for p in (left, MARKER, text[i:j + 1], MARKER, right) if p]
    return " ".join(parts)


def annotate_wiki(pair: ParagraphPair, src: Paragraph, tgt: Paragraph,
                  counters: dict | None = None) -> list[AlignmentExample]:
    """Align the first mention of the shared entity on each side, both directions."""
    picks = []
    for para in (src, tgt):
        hits = [m for m in para.mentions if m.entity_id == pair.entity_id]
        if not hits:
            raise DataError(
                f"paragraph {para.id!r} has no mention of entity "
                f"{pair.entity_id!r} (index inconsistency)")
        if len(hits) > 1 and counters is not None:
            counters["multi_mention"] = counters.get("multi_mention", 0) + 1
        first = min(hits, key=lambda m: m.start)
        picks.append((first.start, first.end))
    (i, j), (k, l) = picks
    forward = AlignmentExample(
        src_id=src.id, tgt_id=tgt.id, kind="wiki", entity_id=pair.entity_id,
        src_text=src.text, tgt_text=tgt.text, src_span=(i, j), tgt_span=(k, l))
    backward = AlignmentExample(
        src_id=tgt.id, tgt_id=src.id, kind="wiki", entity_id=pair.entity_id,
        src_text=tgt.text, tgt_text=src.text, src_span=(k, l), tgt_span=(i, j))
    for ex in (forward, backward):
        validate_example(ex)
    return [forward, backward]


def similarity_matrix(ex: TokenEmbeddings, ey: TokenEmbeddings) -> np.ndarray:
    """Pairwise cosine of token vectors; rows = ex tokens, cols = ey tokens."""
    if not len(ex.tokens) or not len(ey.tokens):
        raise DataError("similarity matrix needs non-empty token sets")
    a = np.asarray(ex.vectors, dtype=np.float64)
    b = np.asarray(ey.vectors, dtype=np.float64)
    if a.shape[1] != b.shape[1]:
        raise DataError(f"embedding dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    if np.any(na == 0.0) or np.any(nb == 0.0):
        raise DataError("zero token vector has no cosine similarity")
    sims = (a / na[:, None]) @ (b / nb[:, None]).T
    return np.clip(sims, -1.0, 1.0)


def mutual_argmax(sim: np.ndarray) -> list[tuple[int, int]]:
    """Token index pairs where each is the other's most similar token.

    Ties break to the lowest index; the result is a partial one-to-one
    matching ordered by source index.
    """
    sim = np.asarray(sim)
    if sim.size == 0:
        raise DataError("mutual argmax of an empty matrix")
    row_best = np.argmax(sim, axis=1)  # argmax returns the first (lowest) maximizer
    col_best = np.argmax(sim, axis=0)
    return [(a, int(row_best[a]))
            for a in range(sim.shape[0]) if col_best[row_best[a]] == a]


def pos_gate(pairs: list[tuple[int, int]], tags_x: PosTags, tags_y: PosTags,
             common_tags: frozenset[str] | set[str] = COMMON_TAGS) -> list[tuple[int, int]]:
    """Keep (a, b) iff at least one side is tagged as a common word."""
    kept = []
    for a, b in pairs:
        if a >= len(tags_x.tags) or b >= len(tags_y.tags):
            raise ValidationError(
                "alignment index beyond tag list; tags and tokens out of sync",
                field="tags")
        if tags_x.tags[a] in common_tags or tags_y.tags[b] in common_tags:
            kept.append((a, b))
    return kept


def _overlaps_mention(span: tuple[int, int], para: Paragraph) -> bool:
    s, e = span
    return any(m.start <= e and s <= m.end for m in para.mentions)


def annotate_common(
    pair: ParagraphPair,
    src: Paragraph,
    tgt: Paragraph,
    embeddings: Mapping[str, TokenEmbeddings],
    tags: Mapping[str, PosTags],
    common_tags: frozenset[str] | set[str] = COMMON_TAGS,
    counters: dict | None = None,
) -> list[AlignmentExample]:
    """Mutual-argmax + POS gate over sidecar embeddings, both directions."""
    sides = []
    for para in (src, tgt):
        if para.id not in embeddings:
            raise DataError(f"no token embeddings for paragraph {para.id!r}")
        if para.id not in tags:
            raise DataError(f"no POS tags for paragraph {para.id!r}")
        emb, pos = embeddings[para.id], tags[para.id]
        if emb.tokens != pos.tokens:
            raise DataError(
                f"token spans of embeddings and POS tags disagree for "
                f"paragraph {para.id!r}")
        for start, end in emb.tokens:
            if end >= len(para.text):
                raise ValidationError(
                    f"token span ({start}, {end}) beyond text length "
                    f"{len(para.text)}", field="tokens", record_id=para.id)
        sides.append((emb, pos))
    (ex, tx), (ey, ty) = sides
    if not len(ex.tokens) or not len(ey.tokens):
        return []
    gated = pos_gate(mutual_argmax(similarity_matrix(ex, ey)), tx, ty, common_tags)
    out: list[AlignmentExample] = []
    for a, b in gated:
        i, j = ex.tokens[a]
        k, l = ey.tokens[b]
        if counters is not None and (
                _overlaps_mention((i, j), src) or _overlaps_mention((k, l), tgt)):
            counters["common_overlapping_wiki"] = \
                counters.get("common_overlapping_wiki", 0) + 1
        forward = AlignmentExample(
            src_id=src.id, tgt_id=tgt.id, kind="common",
            src_text=src.text, tgt_text=tgt.text,
            src_span=(i, j), tgt_span=(k, l))
        backward = AlignmentExample(
            src_id=tgt.id, tgt_id=src.id, kind="common",
            src_text=tgt.text, tgt_text=src.text,
            src_span=(k, l), tgt_span=(i, j))
        validate_example(forward)
        validate_example(backward)
        out.extend((forward, backward))
    return out


def merge_datasets(d_wiki: list[AlignmentExample], d_com: list[AlignmentExample],
                   common_fraction: float, seed: int = 0) -> list[AlignmentExample]:
    """Union of wiki examples and a seeded pair-level sample of common examples.

    Sampling selects whole paragraph pairs (both directions travel
    together); exact duplicates are removed keeping first occurrence.
    """
    if not (0.0 <= common_fraction <= 1.0):
        raise ConfigError(f"common_fraction must be in [0, 1], got {common_fraction}")
    groups: dict[tuple[str, str], list[AlignmentExample]] = {}
    for ex in d_com:
        key = (min(ex.src_id, ex.tgt_id), max(ex.src_id, ex.tgt_id))
        groups.setdefault(key, []).append(ex)
    keys = list(groups)
    n_take = int(np.floor(common_fraction * len(keys) + 0.5))
    if n_take >= len(keys):
        chosen = keys
    elif n_take == 0:
        chosen = []
    else:
        rng = make_rng(seed, "merge-common")
        idx = sorted(rng.choice(len(keys), size=n_take, replace=False))
        chosen = [keys[i] for i in idx]
    merged: list[AlignmentExample] = []
    seen: set[AlignmentExample] = set()
    for ex in list(d_wiki) + [e for key in chosen for e in groups[key]]:
        if ex in seen:
            continue
        seen.add(ex)
        merged.append(ex)
    return merged


# ------------------------------------------------------------------- file I/O

def example_to_dict(ex: AlignmentExample) -> dict:
    doc = {
        "src_id": ex.src_id, "tgt_id": ex.tgt_id, "kind": ex.kind,
        "src_text": ex.src_text, "tgt_text": ex.tgt_text,
        "src_span": list(ex.src_span), "tgt_span": list(ex.tgt_span),
    }
    if ex.entity_id is not None:
        doc["entity"] = ex.entity_id
    return doc


def example_from_dict(obj: dict, *, line: int | None = None) -> AlignmentExample:
    try:
        ex = AlignmentExample(
            src_id=obj["src_id"], tgt_id=obj["tgt_id"], kind=obj["kind"],
            src_text=obj["src_text"], tgt_text=obj["tgt_text"],
            src_span=tuple(obj["src_span"]), tgt_span=tuple(obj["tgt_span"]),
            entity_id=obj.get("entity"))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad example record: {exc}", line=line) from exc
    validate_example(ex)
    return ex


def write_examples(examples: Iterable[AlignmentExample], path: str) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ex in examples:
            fh.write(json.dumps(example_to_dict(ex), ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n


def load_examples(path: str) -> Iterator[AlignmentExample]:
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if raw.strip():
                yield example_from_dict(json.loads(raw), line=lineno)


def _sort_key(ex: AlignmentExample):
    return (ex.src_id, ex.tgt_id, ex.kind, ex.src_span, ex.tgt_span,
            ex.entity_id or "")


def squad_record(ex: AlignmentExample) -> dict:
    i, j = ex.src_span
    k, l = ex.tgt_span
    rec = {
        "id": f"{ex.src_id}~{ex.tgt_id}~{ex.kind}~{i}-{j}~{k}-{l}",
        "question": mark_span(ex.src_text, i, j),
        "context": ex.tgt_text,
        "answers": [{"text": ex.tgt_text[k:l + 1], "answer_start": k}],
        "kind": ex.kind,
        "src": ex.src_id,
        "tgt": ex.tgt_id,
        "src_span": [i, j],
    }
    if ex.entity_id is not None:
        rec["entity"] = ex.entity_id
    return rec


def emit_squad(dataset: Iterable[AlignmentExample], out_path: str) -> int:
    """Write the SQuAD-style training file; returns the record count."""
    ordered = sorted(dataset, key=_sort_key)
    for ex in ordered:
        validate_example(ex)
    doc = {"version": DATASET_VERSION, "data": [squad_record(ex) for ex in ordered]}
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, ensure_ascii=False, indent=1)
        fh.write("\n")
    return len(ordered)


def load_squad(path: str) -> list[dict]:
    """Load a SQuAD-style dataset; adds derived inclusive (k, l) per record."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("version") != DATASET_VERSION:
        raise DataError(f"{path}: unsupported dataset version {doc.get('version')!r}")
    records = []
    for rec in doc["data"]:
        answer = rec["answers"][0]
        k = int(answer["answer_start"])
        text = answer["text"]
        l = k + len(text) - 1
        if rec["context"][k:l + 1] != text:
            raise ValidationError("answer text does not match context slice",
                                  field="answers", record_id=rec.get("id"))
        records.append({**rec, "target_span": (k, l)})
    return records
