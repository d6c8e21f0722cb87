"""Input parsing and sidecar serialization.

Input: paragraph JSONL, one object per line with at least ``id`` and
``text`` (extra keys such as ``lang`` or ``mentions`` are ignored).

Outputs follow the sidecar formats of the consuming toolkit:

* binary "WSPE" container for embeddings, little-endian throughout:
  header ``magic b"WSPE" | version u32 | dim u32 | count u64 | float
  width u32 (= 32)``, then per record ``id length u16 | id bytes UTF-8 |
  token count u32 | token spans (u32 start, u32 end) x n (token-level
  files only) | vectors f32 x (n * dim)``.  Paragraph-level records store
  token count 1 and no spans.
* JSONL for POS tags ``{"id", "tokens": [[start, end], ...], "tags"}``
  and subword counts ``{"id", "subwords"}``.

Token spans are character offsets, inclusive on both ends.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataError

WSPE_MAGIC = b"WSPE"
WSPE_VERSION = 1
FLOAT_WIDTH = 32

_HEADER = struct.Struct("<4sIIQI")


@dataclass(frozen=True)
class InputParagraph:
    id: str
    text: str


def read_paragraphs(path: str) -> list[InputParagraph]:
    """Load input paragraphs, preserving file order; ids must be unique."""
    out: list[InputParagraph] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: not valid JSON: {exc}") \
                    from exc
            if not isinstance(obj, dict) or "id" not in obj or "text" not in obj:
                raise DataError(f"{path}:{lineno}: expected an object with "
                                f"'id' and 'text'")
            pid, text = obj["id"], obj["text"]
            if not isinstance(pid, str) or not pid:
                raise DataError(f"{path}:{lineno}: 'id' must be a non-empty "
                                f"string")
            if not isinstance(text, str):
                raise DataError(f"{path}:{lineno}: 'text' must be a string")
            if pid in seen:
                raise DataError(f"{path}:{lineno}: duplicate paragraph id "
                                f"{pid!r}")
            seen.add(pid)
            out.append(InputParagraph(pid, text))
    return out


def _write_header(fh, dim: int, count: int) -> None:
    fh.write(_HEADER.pack(WSPE_MAGIC, WSPE_VERSION, dim, count, FLOAT_WIDTH))


def write_paragraph_vectors(path: str, dim: int,
                            records: list[tuple[str, np.ndarray]]) -> None:
    """Binary sidecar with one vector per paragraph, in list order."""
    with open(path, "wb") as fh:
        _write_header(fh, dim, len(records))
        for pid, vec in records:
            assert vec.size == dim
            ident = pid.encode("utf-8")
            fh.write(struct.pack("<H", len(ident)))
            fh.write(ident)
            fh.write(struct.pack("<I", 1))
            fh.write(np.ascontiguousarray(vec, dtype="<f4").tobytes())


def write_token_vectors(
        path: str, dim: int,
        records: list[tuple[str, list[tuple[int, int]], np.ndarray]]) -> None:
    """Binary sidecar with token spans and one vector per token."""
    with open(path, "wb") as fh:
        _write_header(fh, dim, len(records))
        for pid, spans, matrix in records:
            assert matrix.shape == (len(spans), dim)
            ident = pid.encode("utf-8")
            fh.write(struct.pack("<H", len(ident)))
            fh.write(ident)
            fh.write(struct.pack("<I", len(spans)))
            for start, end in spans:
                fh.write(struct.pack("<II", start, end))
            fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())


def write_pos_jsonl(
        path: str,
        records: list[tuple[str, list[tuple[int, int]], list[str]]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pid, spans, tags in records:
            assert len(spans) == len(tags)
            fh.write(json.dumps({
                "id": pid,
                "tokens": [[s, e] for s, e in spans],
                "tags": tags,
            }, ensure_ascii=False))
            fh.write("\n")


def write_counts_jsonl(path: str, records: list[tuple[str, int]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pid, count in records:
            fh.write(json.dumps({"id": pid, "subwords": int(count)},
                                ensure_ascii=False))
            fh.write("\n")
