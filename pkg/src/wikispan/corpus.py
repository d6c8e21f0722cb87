"""Paragraph corpus ingestion: entity mentions, wikitext links, JSONL I/O.

A paragraph is a Unicode text with zero or more entity mentions. Mention
offsets are Unicode scalar values, 0-based and inclusive on both ends, so
``text[m.start : m.end + 1] == m.surface`` always holds.

The wikitext parser supports exactly two link forms, ``[[Title]]`` and
``[[Title|surface]]``, plus a pre-pass that strips ``{{...}}`` blocks.
Anything fancier (templates with content, nesting, refs) is out of scope.
"""

from __future__ import annotations

import io
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import ParseError, ValidationError

_TEMPLATE_RE = re.compile(r"\{\{[^{}]*?\}\}", re.DOTALL)


@dataclass
class Mention:
    """An entity mention: character span [start, end] plus its entity id."""

    entity_id: str
    start: int
    end: int
    surface: str


@dataclass
class Paragraph:
    id: str
    lang: str
    text: str
    mentions: list[Mention] = field(default_factory=list)


def _byte_pos(raw: str, char_pos: int) -> int:
    return len(raw[:char_pos].encode("utf-8"))


def normalize_title(title: str) -> str:
    return title.replace("_", " ").strip()


class TitleEntityMap:
    """Per-language page-title -> entity-id lookup table.

    Titles are normalized (underscores to spaces, trimmed) on both insert
    and lookup; a miss is retried with the first character case-swapped,
    mirroring the wiki convention that the leading letter is caseless.
    """

    def __init__(self) -> None:
        self._by_lang: dict[str, dict[str, str]] = {}

    def add(self, lang: str, title: str, entity_id: str) -> None:
        self._by_lang.setdefault(lang, {})[normalize_title(title)] = entity_id

    def lookup(self, lang: str, title: str) -> str | None:
        table = self._by_lang.get(lang)
        if table is None:
            return None
        key = normalize_title(title)
        candidates = [key]
        if key:
            candidates.append(key[0].upper() + key[1:])
            candidates.append(key[0].lower() + key[1:])
        for cand in candidates:
            hit = table.get(cand)
            if hit is not None:
                return hit
        return None

    @classmethod
    def from_json(cls, path: str) -> "TitleEntityMap":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        m = cls()
        for lang, titles in raw.items():
            for title, qid in titles.items():
                m.add(lang, title, qid)
        return m


def strip_templates(raw: str) -> str:
    """Delete {{...}} blocks, innermost first, until none remain."""
    prev = None
    while prev != raw:
        prev = raw
        raw = _TEMPLATE_RE.sub("", raw)
    return raw


def parse_wikitext_links(
    raw: str, lang: str, title_map: TitleEntityMap
) -> tuple[str, list[Mention]]:
    """Convert bracketed hyperlinks into plain text plus resolved mentions.

    Each ``[[Title]]`` / ``[[Title|surface]]`` link is replaced by its
    surface (the title itself when no surface is given). Links whose title
    resolves through *title_map* yield a Mention with offsets into the
    returned text; unresolved links become plain text with no mention.

    Raises ParseError on unbalanced ``[[`` / ``]]`` or an empty title or
    surface.
    """
    raw = strip_templates(raw)
    out: list[str] = []
    mentions: list[Mention] = []
    out_len = 0
    pos = 0
    while pos < len(raw):
        open_at = raw.find("[[", pos)
        close_at = raw.find("]]", pos)
        if open_at == -1 and close_at == -1:
            out.append(raw[pos:])
            out_len += len(raw) - pos
            break
        if open_at == -1 or (close_at != -1 and close_at < open_at):
            raise ParseError(
                "unbalanced ']]' with no matching '[['",
                char_pos=close_at,
                byte_pos=_byte_pos(raw, close_at),
            )
        out.append(raw[pos:open_at])
        out_len += open_at - pos
        body_start = open_at + 2
        close_at = raw.find("]]", body_start)
        if close_at == -1:
            raise ParseError(
                "unbalanced '[[' with no matching ']]'",
                char_pos=open_at,
                byte_pos=_byte_pos(raw, open_at),
            )
        inner_open = raw.find("[[", body_start)
        if inner_open != -1 and inner_open < close_at:
            raise ParseError(
                "nested '[[' inside a link",
                char_pos=inner_open,
                byte_pos=_byte_pos(raw, inner_open),
            )
        body = raw[body_start:close_at]
        title, sep, surface = body.partition("|")
        if not sep:
            surface = title
        if not title.strip():
            raise ParseError(
                "empty link title",
                char_pos=open_at,
                byte_pos=_byte_pos(raw, open_at),
            )
        if not surface:
            raise ParseError(
                "empty link surface",
                char_pos=open_at,
                byte_pos=_byte_pos(raw, open_at),
            )
        qid = title_map.lookup(lang, title)
        if qid is not None:
            mentions.append(
                Mention(entity_id=qid, start=out_len, end=out_len + len(surface) - 1,
                        surface=surface)
            )
        out.append(surface)
        out_len += len(surface)
        pos = close_at + 2
    return "".join(out), mentions


def canonicalize_mentions(
    text: str, mentions: list[Mention]
) -> tuple[list[Mention], int]:
    """Sort mentions by start and resolve overlaps.

    On overlap the leftmost mention wins; among equal starts the longest
    wins. Returns the kept list and the number dropped.
    """
    ordered = sorted(mentions, key=lambda m: (m.start, -m.end))
    kept: list[Mention] = []
    dropped = 0
    for m in ordered:
        if kept and m.start <= kept[-1].end:
            dropped += 1
            continue
        kept.append(m)
    return kept, dropped


def _validate_mention(m: Mention, text: str, *, record_id: str, line: int | None) -> None:
    if not m.entity_id:
        raise ValidationError("entity id must be non-empty", field="qid",
                              record_id=record_id, line=line)
    if not (0 <= m.start <= m.end < len(text)):
        raise ValidationError(
            f"span ({m.start}, {m.end}) out of bounds for text of length {len(text)}",
            field="start/end", record_id=record_id, line=line)
    actual = text[m.start : m.end + 1]
    if actual != m.surface:
        raise ValidationError(
            f"surface {m.surface!r} does not match text slice {actual!r}",
            field="surface", record_id=record_id, line=line)


def validate_paragraph(p: Paragraph, *, line: int | None = None) -> tuple[Paragraph, int]:
    """Enforce paragraph invariants; returns (canonical paragraph, overlaps dropped)."""
    if not p.id:
        raise ValidationError("paragraph id must be non-empty", field="id", line=line)
    if not p.text:
        raise ValidationError("paragraph text must be non-empty", field="text",
                              record_id=p.id, line=line)
    for m in p.mentions:
        _validate_mention(m, p.text, record_id=p.id, line=line)
    kept, dropped = canonicalize_mentions(p.text, p.mentions)
    return Paragraph(id=p.id, lang=p.lang, text=p.text, mentions=kept), dropped


def paragraph_to_dict(p: Paragraph) -> dict:
    return {
        "id": p.id,
        "lang": p.lang,
        "text": p.text,
        "mentions": [
            {"qid": m.entity_id, "start": m.start, "end": m.end, "surface": m.surface}
            for m in p.mentions
        ],
    }


def paragraph_from_dict(obj: dict, *, line: int | None = None) -> Paragraph:
    try:
        mentions = [
            Mention(entity_id=m["qid"], start=int(m["start"]), end=int(m["end"]),
                    surface=m["surface"])
            for m in obj.get("mentions", [])
        ]
        return Paragraph(id=obj["id"], lang=obj["lang"], text=obj["text"],
                         mentions=mentions)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad paragraph record: {exc}", line=line) from exc


def load_paragraphs(path: str, counters: dict | None = None) -> Iterator[Paragraph]:
    """Stream validated paragraphs from a JSONL file.

    Optional *counters* dict collects ``overlap_dropped`` and ``records``
    tallies for the caller's manifest.
    """
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw_line in enumerate(fh, start=1):
            if not raw_line.strip():
                continue
            try:
                obj = json.loads(raw_line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"malformed JSON: {exc.msg}", line=lineno,
                                 column=exc.colno) from exc
            para = paragraph_from_dict(obj, line=lineno)
            para, dropped = validate_paragraph(para, line=lineno)
            if para.id in seen:
                raise ValidationError("duplicate paragraph id", field="id",
                                      record_id=para.id, line=lineno)
            seen.add(para.id)
            if counters is not None:
                counters["overlap_dropped"] = counters.get("overlap_dropped", 0) + dropped
                counters["records"] = counters.get("records", 0) + 1
            yield para


def write_paragraphs(paragraphs: Iterable[Paragraph], path: str) -> int:
    """Write paragraphs as UTF-8 JSONL with LF line endings; returns count."""
    n = 0
    with io.open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in paragraphs:
            fh.write(json.dumps(paragraph_to_dict(p), ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n
