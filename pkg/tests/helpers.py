"""Shared builders for synthetic corpora and alignment tasks.

The synthetic language pair uses a bijective word substitution: source
words are drawn from one alphabet, target words from a disjoint one, and
word type ``i`` on the source side always translates to word type ``i``
on the target side.  Gold alignment for any generated sentence pair is
therefore the identity mapping, which makes every downstream metric
checkable without human annotation.
"""

from __future__ import annotations

import json
import random

import numpy as np


def two_char_words(alphabet: str, n: int) -> list[str]:
    """First *n* distinct two-character words over *alphabet*."""
    out = []
    for a in alphabet:
        for b in alphabet:
            out.append(a + b)
            if len(out) == n:
                return out
    raise ValueError(f"alphabet too small for {n} words")


SRC_WORDS = two_char_words("abcdefghij", 40)
TGT_WORDS = two_char_words("qrstuvwxyz", 40)


def make_sentence_pairs(n_pairs: int, seed: int, min_len: int = 5,
                        max_len: int = 12,
                        n_types: int = 40) -> list[tuple[list[str], list[str]]]:
    """Sentence pairs over the substitution lexicon; words distinct per sentence."""
    rng = random.Random(seed)
    pairs = []
    for _ in range(n_pairs):
        n = rng.randint(min_len, max_len)
        idxs = rng.sample(range(n_types), n)
        pairs.append(([SRC_WORDS[i] for i in idxs],
                      [TGT_WORDS[i] for i in idxs]))
    return pairs


def span_of_word(tokens: list[str], w: int) -> tuple[int, int]:
    """Inclusive character span of token *w* in the single-space joined text."""
    start = sum(len(t) + 1 for t in tokens[:w])
    return start, start + len(tokens[w]) - 1


def make_training_records(n_pairs: int, seed: int, marks_per_pair: int = 4,
                          **pair_kwargs) -> list[dict]:
    """Span-prediction records marking random words, in both directions."""
    from wikispan.annotate import mark_span

    rng = random.Random(seed + 1)
    records = []
    for src, tgt in make_sentence_pairs(n_pairs, seed, **pair_kwargs):
        src_text, tgt_text = " ".join(src), " ".join(tgt)
        n = len(src)
        for w in rng.sample(range(n), min(marks_per_pair, n)):
            (si, sj), (ti, tj) = span_of_word(src, w), span_of_word(tgt, w)
            records.append({"question": mark_span(src_text, si, sj),
                            "context": tgt_text, "target_span": [ti, tj]})
            records.append({"question": mark_span(tgt_text, ti, tj),
                            "context": src_text, "target_span": [si, sj]})
    return records


def write_mini_corpus(root, n_entities: int = 30, seed: int = 7) -> dict:
    """Raw-document world for CLI runs: one xx and one en paragraph per entity.

    Returns the path map.  Paragraph text embeds the entity surface as a
    bracketed link so the ingest stage has real mentions to resolve.
    """
    rng = random.Random(seed)
    titles = {"xx": {}, "en": {}}
    docs, counts, embs = [], {}, {}
    for k in range(n_entities):
        titles["xx"][f"Ent{k} xx"] = f"Q{k}"
        titles["en"][f"Ent{k} en"] = f"Q{k}"
        for lang, vocab, title in (("xx", SRC_WORDS, f"Ent{k} xx"),
                                   ("en", TGT_WORDS, f"Ent{k} en")):
            n = rng.randint(6, 9)
            idxs = rng.sample(range(30), n)
            toks = [vocab[i] for i in idxs]
            pos = rng.randrange(n)
            toks[pos] = f"[[{title}|{vocab[idxs[pos]]}]]"
            pid = f"{lang}-{k}"
            docs.append({"id": pid, "lang": lang, "text": " ".join(toks)})
            counts[pid] = 60
            vec = np.zeros(4, dtype=np.float32)
            vec[0] = 1.0
            embs[pid] = vec

    from wikispan import sidecars

    paths = {
        "raw_docs": str(root / "raw.jsonl"),
        "title_map": str(root / "titles.json"),
        "subword_counts": str(root / "counts.tsv"),
        "paragraph_embeddings": str(root / "para_embs.bin"),
        "sentences": str(root / "sentences.tsv"),
        "gold": str(root / "gold.txt"),
    }
    with open(paths["raw_docs"], "w", encoding="utf-8") as fh:
        for d in docs:
            fh.write(json.dumps(d) + "\n")
    with open(paths["title_map"], "w", encoding="utf-8") as fh:
        json.dump(titles, fh, indent=1)
    sidecars.write_subword_counts(counts, paths["subword_counts"])
    sidecars.write_paragraph_embeddings(embs, paths["paragraph_embeddings"])

    with open(paths["sentences"], "w", encoding="utf-8") as sf, \
            open(paths["gold"], "w", encoding="utf-8") as gf:
        for src, tgt in make_sentence_pairs(5, seed + 2, 4, 7, 30):
            sf.write(" ".join(src) + "\t" + " ".join(tgt) + "\n")
            gf.write(" ".join(f"{p}-{p}" for p in range(len(src))) + "\n")
    return paths


def write_mini_config(path, paths: dict, seed: int = 3, steps: int = 60) -> str:
    body = f"""\
version: wsp-1
seed: {seed}
train:
  total_steps: {steps}
  warmup_steps: {min(10, steps)}
  batch_size: 8
model:
  embed_dim: 32
  num_blocks: 1
  num_heads: 2
  hidden_dim: 64
  max_len: 120
paths:
"""
    for key, value in paths.items():
        body += f"  {key}: {value}\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(body)
    return str(path)
