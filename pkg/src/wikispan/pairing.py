"""Co-mention pairing: inverted entity index and pairwise paragraph combination.

Every paragraph that mentions entity ``e`` lands once in the index list for
``e``; paragraphs sharing an entity are then combined pairwise. Pair output
is deterministic: entities are visited in sorted order, pairs within an
entity in canonical (src < tgt) sorted order, and a global dedup keeps the
first entity under which a pair was seen.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import ConfigError, ValidationError
from .corpus import Paragraph
from .seeding import make_rng

MODES = ("cross_lingual", "monolingual", "english_centric")


@dataclass
class EntityIndex:
    """Inverted index entity_id -> paragraph ids, plus per-paragraph language."""

    entities: dict[str, list[str]] = field(default_factory=dict)
    para_lang: dict[str, str] = field(default_factory=dict)

    def to_json(self, path: str) -> None:
        doc = {
            "entities": {e: ids for e, ids in sorted(self.entities.items())},
            "paragraphs": {p: {"lang": l} for p, l in sorted(self.para_lang.items())},
        }
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, ensure_ascii=False, indent=1)
            fh.write("\n")

    @classmethod
    def from_json(cls, path: str) -> "EntityIndex":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(
            entities={e: list(ids) for e, ids in doc["entities"].items()},
            para_lang={p: meta["lang"] for p, meta in doc["paragraphs"].items()},
        )


@dataclass(frozen=True)
class ParagraphPair:
    src_id: str
    tgt_id: str
    entity_id: str
    src_lang: str
    tgt_lang: str


@dataclass
class PairingStats:
    """Counters collected while pairs are generated (audit trail for dedup/cap)."""

    entities_indexed: int = 0
    entities_paired: int = 0
    combinations: int = 0
    after_mode: int = 0
    after_cap: int = 0
    duplicates_dropped: int = 0
    emitted: int = 0

    def to_dict(self) -> dict:
        return dict(vars(self))


def build_index(paragraphs: Iterable[Paragraph]) -> EntityIndex:
    """Build the inverted entity index; a paragraph appears once per entity."""
    index = EntityIndex()
    for p in paragraphs:
        if p.id in index.para_lang:
            raise ValidationError("duplicate paragraph id", field="id", record_id=p.id)
        index.para_lang[p.id] = p.lang
        seen_here: set[str] = set()
        for m in p.mentions:
            if m.entity_id in seen_here:
                continue
            seen_here.add(m.entity_id)
            index.entities.setdefault(m.entity_id, []).append(p.id)
    return index


def _mode_keep(mode: str, lang_a: str, lang_b: str, entity_langs: set[str]) -> bool:
    if mode == "cross_lingual":
        return lang_a != lang_b
    if mode == "monolingual":
        return lang_a == lang_b and len(entity_langs) >= 2
    if mode == "english_centric":
        return (lang_a == "en") != (lang_b == "en")
    raise ConfigError(f"unknown pairing mode {mode!r}")


def collect_pairs(
    index: EntityIndex,
    mode: str,
    cap_per_entity: int | None = None,
    seed: int = 0,
    english_as_target: bool = True,
    stats: PairingStats | None = None,
) -> Iterator[ParagraphPair]:
    """Emit co-mention pairs per entity, mode-filtered, capped, deduplicated.

    Pairs are canonically ordered (src < tgt) for dedup; english_centric
    mode then orients the English paragraph to the target side (or source
    when *english_as_target* is false).
    """
    if mode not in MODES:
        raise ConfigError(f"unknown pairing mode {mode!r}; expected one of {MODES}")
    if cap_per_entity is not None and cap_per_entity <= 0:
        raise ConfigError("cap_per_entity must be a positive int or None")
    if stats is None:
        stats = PairingStats()
    stats.entities_indexed = len(index.entities)
    seen_pairs: set[tuple[str, str]] = set()
    for entity in sorted(index.entities):
        ids = index.entities[entity]
        if len(ids) < 2:
            continue
        entity_langs = {index.para_lang[p] for p in ids}
        kept: list[tuple[str, str]] = []
        for a, b in itertools.combinations(ids, 2):
            stats.combinations += 1
            if not _mode_keep(mode, index.para_lang[a], index.para_lang[b], entity_langs):
                continue
            kept.append((a, b) if a < b else (b, a))
        stats.after_mode += len(kept)
        if cap_per_entity is not None and len(kept) > cap_per_entity:
            rng = make_rng(seed, "pair-cap", entity)
            chosen = rng.choice(len(kept), size=cap_per_entity, replace=False)
            kept = [kept[i] for i in sorted(chosen)]
        stats.after_cap += len(kept)
        emitted_any = False
        for src_id, tgt_id in sorted(kept):
            if (src_id, tgt_id) in seen_pairs:
                stats.duplicates_dropped += 1
                continue
            seen_pairs.add((src_id, tgt_id))
            src_lang = index.para_lang[src_id]
            tgt_lang = index.para_lang[tgt_id]
            if mode == "english_centric" and (tgt_lang == "en") != english_as_target:
                src_id, tgt_id = tgt_id, src_id
                src_lang, tgt_lang = tgt_lang, src_lang
            stats.emitted += 1
            emitted_any = True
            yield ParagraphPair(src_id=src_id, tgt_id=tgt_id, entity_id=entity,
                                src_lang=src_lang, tgt_lang=tgt_lang)
        if emitted_any:
            stats.entities_paired += 1


def pair_stats(pairs: Iterable[ParagraphPair]) -> dict:
    """Recount a pair stream: totals plus language-pair and entity histograms."""
    by_lang: dict[str, int] = {}
    by_entity: dict[str, int] = {}
    n = 0
    for p in pairs:
        n += 1
        lang_key = f"{p.src_lang}-{p.tgt_lang}"
        by_lang[lang_key] = by_lang.get(lang_key, 0) + 1
        by_entity[p.entity_id] = by_entity.get(p.entity_id, 0) + 1
    return {
        "pairs": n,
        "entities": len(by_entity),
        "by_lang_pair": dict(sorted(by_lang.items())),
        "by_entity": dict(sorted(by_entity.items())),
    }


def pair_to_dict(p: ParagraphPair) -> dict:
    return {"src": p.src_id, "tgt": p.tgt_id, "qid": p.entity_id,
            "src_lang": p.src_lang, "tgt_lang": p.tgt_lang}


def pair_from_dict(obj: dict, *, line: int | None = None) -> ParagraphPair:
    try:
        return ParagraphPair(src_id=obj["src"], tgt_id=obj["tgt"], entity_id=obj["qid"],
                             src_lang=obj["src_lang"], tgt_lang=obj["tgt_lang"])
    except KeyError as exc:
        raise ValidationError(f"bad pair record: missing {exc}", line=line) from exc


def write_pairs(pairs: Iterable[ParagraphPair], path: str) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in pairs:
            fh.write(json.dumps(pair_to_dict(p), ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n


def load_pairs(path: str) -> Iterator[ParagraphPair]:
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            yield pair_from_dict(json.loads(raw), line=lineno)
