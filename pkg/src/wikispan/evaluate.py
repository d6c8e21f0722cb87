"""Alignment scoring: precision, recall, F1 and alignment error rate.

Gold annotations distinguish sure links ("p-q") from possible-only links
("p?q"); sure links are implicitly possible, so S ⊆ P always holds.
Corpus metrics are micro-averaged: counts are summed over sentences
before dividing.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Sequence

from .errors import DataError, ParseError

_GOLD_TOKEN = re.compile(r"^(\d+)([-?])(\d+)$")


@dataclass(frozen=True)
class GoldAlignment:
    """Sure and possible link sets for one sentence pair; sure ⊆ possible."""

    sure: frozenset
    possible: frozenset

    def __post_init__(self) -> None:
        object.__setattr__(self, "sure", frozenset(self.sure))
        object.__setattr__(self, "possible",
                           frozenset(self.possible) | self.sure)


def load_gold(path: str, one_based: bool = False) -> list[GoldAlignment]:
    """Parse a gold file: one line per sentence, "p-q" sure / "p?q" possible.

    ``one_based`` converts externally 1-based indices to the internal
    0-based convention on load.
    """
    out = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            sure, possible = set(), set()
            for tok_match in re.finditer(r"\S+", line):
                tok = tok_match.group()
                column = tok_match.start() + 1
                m = _GOLD_TOKEN.match(tok)
                if not m:
                    raise ParseError(
                        f"{path}: malformed gold token {tok!r}",
                        line=n, column=column)
                p, q = int(m.group(1)), int(m.group(3))
                if one_based:
                    if p < 1 or q < 1:
                        raise ParseError(
                            f"{path}: index {tok!r} not 1-based",
                            line=n, column=column)
                    p, q = p - 1, q - 1
                if m.group(2) == "-":
                    sure.add((p, q))
                else:
                    possible.add((p, q))
            out.append(GoldAlignment(frozenset(sure), frozenset(possible)))
    return out


@dataclass
class SentenceScore:
    index: int
    n_a: int
    n_s: int
    n_p: int
    a_and_s: int
    a_and_p: int
    precision: float
    recall: float
    f1: float
    aer: float


@dataclass
class MetricsReport:
    precision: float
    recall: float
    f1: float
    aer: float
    n_a: int
    n_s: int
    n_p: int
    a_and_s: int
    a_and_p: int
    per_sentence: list[SentenceScore] = field(default_factory=list)


def _ratios(n_a: int, n_s: int, a_and_s: int, a_and_p: int):
    """Shared empty-denominator conventions, applied per sentence and corpus-wide."""
    if n_a == 0:
        precision = 1.0 if n_s == 0 else 0.0
    else:
        precision = a_and_p / n_a
    recall = 1.0 if n_s == 0 else a_and_s / n_s
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    aer = 0.0 if n_a + n_s == 0 else 1.0 - (a_and_s + a_and_p) / (n_a + n_s)
    return precision, recall, f1, aer


def compute_metrics(predicted: Sequence[set], gold: Sequence[GoldAlignment]) -> MetricsReport:
    """Micro-averaged precision / recall / F1 / AER over aligned sentence lists."""
    if len(predicted) != len(gold):
        raise DataError(
            f"predicted {len(predicted)} sentences but gold has {len(gold)}")
    tot_a = tot_s = tot_p = tot_as = tot_ap = 0
    rows = []
    for idx, (a, g) in enumerate(zip(predicted, gold)):
        a = set(a)
        n_a, n_s, n_p = len(a), len(g.sure), len(g.possible)
        a_and_s = len(a & g.sure)
        a_and_p = len(a & g.possible)
        tot_a += n_a
        tot_s += n_s
        tot_p += n_p
        tot_as += a_and_s
        tot_ap += a_and_p
        rows.append(SentenceScore(
            idx, n_a, n_s, n_p, a_and_s, a_and_p,
            *_ratios(n_a, n_s, a_and_s, a_and_p)))
    precision, recall, f1, aer = _ratios(tot_a, tot_s, tot_as, tot_ap)
    return MetricsReport(precision, recall, f1, aer, tot_a, tot_s, tot_p,
                         tot_as, tot_ap, rows)


def _summary_line(m) -> str:
    return (f"P={m.precision:.3f} R={m.recall:.3f} "
            f"F1={m.f1:.3f} AER={m.aer:.3f}")


def report(metrics: MetricsReport, fmt: str = "text",
           per_sentence: bool = False) -> str:
    """Render a metrics report as aligned text or JSON."""
    if fmt == "json":
        doc = {
            "precision": metrics.precision,
            "recall": metrics.recall,
            "f1": metrics.f1,
            "aer": metrics.aer,
            "counts": {
                "predicted": metrics.n_a,
                "sure": metrics.n_s,
                "possible": metrics.n_p,
                "predicted_and_sure": metrics.a_and_s,
                "predicted_and_possible": metrics.a_and_p,
            },
        }
        if per_sentence:
            doc["sentences"] = [
                {"index": s.index, "precision": s.precision, "recall": s.recall,
                 "f1": s.f1, "aer": s.aer, "predicted": s.n_a, "sure": s.n_s,
                 "possible": s.n_p}
                for s in metrics.per_sentence]
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if fmt != "text":
        raise DataError(f"unknown report format {fmt!r}")
    lines = [_summary_line(metrics)]
    if per_sentence:
        lines.append("sent  P      R      F1     AER")
        for s in metrics.per_sentence:
            lines.append(f"{s.index:<5d} {s.precision:<6.3f} {s.recall:<6.3f} "
                         f"{s.f1:<6.3f} {s.aer:<6.3f}")
    return "\n".join(lines) + "\n"
