"""Sidecar file I/O: subword counts, embeddings, token spans, POS tags.

Two embedding carriers are supported: a JSONL form ({"id", "vec"} per line)
and the binary "WSPE" container. Binary layout, all little-endian:

    header : magic b"WSPE" | version u32 | dim u32 | count u64 | float width u32 (=32)
    record : id length u16 | id bytes (UTF-8) | token count u32
             | token spans (u32 start, u32 end) x n   -- token-level files only
             | vectors f32 x (n * dim)

Paragraph-level files store one vector per record (token count = 1, no
spans). Token spans are character offsets, inclusive on both ends. The
reader picks binary vs JSONL by sniffing the magic.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataError, ValidationError

WSPE_MAGIC = b"WSPE"
WSPE_VERSION = 1
FLOAT_WIDTH = 32


@dataclass
class TokenEmbeddings:
    """Per-token character spans and one embedding vector per token."""

    paragraph_id: str
    tokens: list[tuple[int, int]]
    vectors: np.ndarray  # shape (n_tokens, dim), float32


@dataclass
class PosTags:
    paragraph_id: str
    tokens: list[tuple[int, int]]
    tags: list[str]


def _check_spans(tokens: list[tuple[int, int]], *, record_id: str) -> None:
    prev_end = -1
    for start, end in tokens:
        if start < 0 or end < start:
            raise ValidationError(f"bad token span ({start}, {end})",
                                  field="tokens", record_id=record_id)
        if start <= prev_end:
            raise ValidationError("token spans overlap or are unsorted",
                                  field="tokens", record_id=record_id)
        prev_end = end


def _check_finite(vec: np.ndarray, *, record_id: str) -> None:
    if not np.all(np.isfinite(vec)):
        raise ValidationError("vector contains NaN or Inf", field="vec",
                              record_id=record_id)


# ---------------------------------------------------------------- JSONL forms

def read_subword_counts(path: str) -> dict[str, int]:
    counts: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            obj = json.loads(raw)
            try:
                counts[obj["id"]] = int(obj["subwords"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"bad count record: {exc}", line=lineno) from exc
    return counts


def write_subword_counts(counts: dict[str, int], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pid, n in counts.items():
            fh.write(json.dumps({"id": pid, "subwords": int(n)}))
            fh.write("\n")


def read_pos_tags(path: str) -> dict[str, PosTags]:
    out: dict[str, PosTags] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            obj = json.loads(raw)
            try:
                rec = PosTags(
                    paragraph_id=obj["id"],
                    tokens=[(int(s), int(e)) for s, e in obj["tokens"]],
                    tags=[str(t) for t in obj["tags"]],
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"bad POS record: {exc}", line=lineno) from exc
            if len(rec.tags) != len(rec.tokens):
                raise ValidationError("tags and tokens differ in length",
                                      field="tags", record_id=rec.paragraph_id,
                                      line=lineno)
            _check_spans(rec.tokens, record_id=rec.paragraph_id)
            out[rec.paragraph_id] = rec
    return out


def write_pos_tags(records: dict[str, PosTags] | list[PosTags], path: str) -> None:
    if isinstance(records, dict):
        records = list(records.values())
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps({
                "id": rec.paragraph_id,
                "tokens": [[s, e] for s, e in rec.tokens],
                "tags": rec.tags,
            }, ensure_ascii=False))
            fh.write("\n")


def _read_embeddings_jsonl(path: str) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            obj = json.loads(raw)
            try:
                vec = np.asarray(obj["vec"], dtype=np.float32)
                pid = obj["id"]
            except (KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"bad embedding record: {exc}", line=lineno) from exc
            if vec.ndim != 1 or vec.size == 0:
                raise ValidationError("embedding vector must be 1-D and non-empty",
                                      field="vec", record_id=pid, line=lineno)
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise ValidationError(
                    f"embedding dimension {vec.size} != file dimension {dim}",
                    field="vec", record_id=pid, line=lineno)
            _check_finite(vec, record_id=pid)
            out[pid] = vec
    return out


def write_embeddings_jsonl(embs: dict[str, np.ndarray], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pid, vec in embs.items():
            fh.write(json.dumps({"id": pid, "vec": [float(x) for x in vec]}))
            fh.write("\n")


# ---------------------------------------------------------------- WSPE binary

_HEADER = struct.Struct("<4sIIQI")


def _write_header(fh, dim: int, count: int) -> None:
    fh.write(_HEADER.pack(WSPE_MAGIC, WSPE_VERSION, dim, count, FLOAT_WIDTH))


def _read_header(fh, path: str) -> tuple[int, int]:
    raw = fh.read(_HEADER.size)
    if len(raw) < _HEADER.size:
        raise DataError(f"{path}: truncated sidecar header")
    magic, version, dim, count, width = _HEADER.unpack(raw)
    if magic != WSPE_MAGIC:
        raise DataError(f"{path}: not a WSPE sidecar (magic {magic!r})")
    if version != WSPE_VERSION:
        raise DataError(f"{path}: unsupported sidecar version {version}")
    if width != FLOAT_WIDTH:
        raise DataError(f"{path}: unsupported float width {width}")
    if dim <= 0:
        raise DataError(f"{path}: non-positive dimension {dim}")
    return dim, count


def _read_exact(fh, n: int, path: str) -> bytes:
    raw = fh.read(n)
    if len(raw) < n:
        raise DataError(f"{path}: truncated sidecar record")
    return raw


def write_paragraph_embeddings(embs: dict[str, np.ndarray], path: str) -> None:
    dims = {int(v.size) for v in embs.values()}
    if len(dims) > 1:
        raise ValidationError(f"mixed embedding dimensions {sorted(dims)}", field="vec")
    dim = dims.pop() if dims else 1
    with open(path, "wb") as fh:
        _write_header(fh, dim, len(embs))
        for pid, vec in embs.items():
            ident = pid.encode("utf-8")
            fh.write(struct.pack("<H", len(ident)))
            fh.write(ident)
            fh.write(struct.pack("<I", 1))
            fh.write(np.asarray(vec, dtype="<f4").tobytes())


def read_paragraph_embeddings(path: str) -> dict[str, np.ndarray]:
    """Load a paragraph-embedding sidecar, binary WSPE or JSONL."""
    with open(path, "rb") as probe:
        if probe.read(4) != WSPE_MAGIC:
            return _read_embeddings_jsonl(path)
    out: dict[str, np.ndarray] = {}
    with open(path, "rb") as fh:
        dim, count = _read_header(fh, path)
        for _ in range(count):
            (id_len,) = struct.unpack("<H", _read_exact(fh, 2, path))
            pid = _read_exact(fh, id_len, path).decode("utf-8")
            (n_tok,) = struct.unpack("<I", _read_exact(fh, 4, path))
            if n_tok != 1:
                raise DataError(f"{path}: paragraph-level record {pid!r} has "
                                f"token count {n_tok}")
            vec = np.frombuffer(_read_exact(fh, 4 * dim, path), dtype="<f4").copy()
            _check_finite(vec, record_id=pid)
            out[pid] = vec
    return out


def write_token_embeddings(records: dict[str, TokenEmbeddings] | list[TokenEmbeddings],
                           path: str) -> None:
    if isinstance(records, dict):
        records = list(records.values())
    dims = {int(r.vectors.shape[1]) for r in records if len(r.tokens)}
    if len(dims) > 1:
        raise ValidationError(f"mixed embedding dimensions {sorted(dims)}", field="vectors")
    dim = dims.pop() if dims else 1
    with open(path, "wb") as fh:
        _write_header(fh, dim, len(records))
        for rec in records:
            ident = rec.paragraph_id.encode("utf-8")
            fh.write(struct.pack("<H", len(ident)))
            fh.write(ident)
            fh.write(struct.pack("<I", len(rec.tokens)))
            for start, end in rec.tokens:
                fh.write(struct.pack("<II", start, end))
            fh.write(np.asarray(rec.vectors, dtype="<f4").tobytes())


def read_token_embeddings(path: str) -> dict[str, TokenEmbeddings]:
    """Load a token-embedding sidecar (binary WSPE or JSONL with spans)."""
    with open(path, "rb") as probe:
        if probe.read(4) != WSPE_MAGIC:
            return _read_token_embeddings_jsonl(path)
    out: dict[str, TokenEmbeddings] = {}
    with open(path, "rb") as fh:
        dim, count = _read_header(fh, path)
        for _ in range(count):
            (id_len,) = struct.unpack("<H", _read_exact(fh, 2, path))
            pid = _read_exact(fh, id_len, path).decode("utf-8")
            (n_tok,) = struct.unpack("<I", _read_exact(fh, 4, path))
            spans = []
            for _ in range(n_tok):
                start, end = struct.unpack("<II", _read_exact(fh, 8, path))
                spans.append((start, end))
            vecs = np.frombuffer(_read_exact(fh, 4 * dim * n_tok, path),
                                 dtype="<f4").reshape(n_tok, dim).copy()
            rec = TokenEmbeddings(paragraph_id=pid, tokens=spans, vectors=vecs)
            _check_spans(rec.tokens, record_id=pid)
            _check_finite(vecs, record_id=pid)
            out[pid] = rec
    return out


def _read_token_embeddings_jsonl(path: str) -> dict[str, TokenEmbeddings]:
    out: dict[str, TokenEmbeddings] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            obj = json.loads(raw)
            try:
                spans = [(int(s), int(e)) for s, e in obj["tokens"]]
                vecs = np.asarray(obj["vecs"], dtype=np.float32)
                pid = obj["id"]
            except (KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"bad token-embedding record: {exc}",
                                      line=lineno) from exc
            if vecs.ndim != 2 or vecs.shape[0] != len(spans):
                raise ValidationError("one vector per token span required",
                                      field="vecs", record_id=pid, line=lineno)
            if dim is None and len(spans):
                dim = vecs.shape[1]
            elif len(spans) and vecs.shape[1] != dim:
                raise ValidationError(
                    f"embedding dimension {vecs.shape[1]} != file dimension {dim}",
                    field="vecs", record_id=pid, line=lineno)
            rec = TokenEmbeddings(paragraph_id=pid, tokens=spans, vectors=vecs)
            _check_spans(spans, record_id=pid)
            _check_finite(vecs, record_id=pid)
            out[pid] = rec
    return out


def write_token_embeddings_jsonl(records: dict[str, TokenEmbeddings] | list[TokenEmbeddings],
                                 path: str) -> None:
    if isinstance(records, dict):
        records = list(records.values())
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps({
                "id": rec.paragraph_id,
                "tokens": [[s, e] for s, e in rec.tokens],
                "vecs": [[float(x) for x in row] for row in rec.vectors],
            }))
            fh.write("\n")
