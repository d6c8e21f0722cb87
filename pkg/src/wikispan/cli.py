"""Command-line entry point: one subcommand per pipeline stage.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal
error.  Every stage writes its outputs to files and appends a manifest
entry, so stages can be re-run and audited in isolation; ``pipeline``
chains them all using the same stage functions.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

from . import align as align_mod
from . import annotate as annotate_mod
from . import corpus as corpus_mod
from . import evaluate as eval_mod
from . import filtering as filter_mod
from . import pairing as pairing_mod
from . import sidecars
from .config import (RunConfig, append_manifest, load_config, make_entry,
                     read_manifest)
from .errors import ConfigError, DataError, WikispanError
from .parallel import ordered_map
from .spanpred import (init_params, load_checkpoint, save_checkpoint, train)

CONFIG_ENV_VAR = "WIKISPAN_CONFIG"


class _UsageError(ConfigError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A003 - argparse API
        raise _UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------------- stages


def _require(value: str | None, what: str) -> str:
    if not value:
        raise ConfigError(f"missing required path for {what}; pass the flag "
                          f"or set paths.{what} in the config")
    return value


def _manifest_path(args, cfg: RunConfig, out_path: str) -> str:
    if getattr(args, "manifest", None):
        return args.manifest
    if cfg.paths.manifest:
        return cfg.paths.manifest
    return os.path.join(os.path.dirname(os.path.abspath(out_path)),
                        "manifest.json")


def stage_ingest(cfg: RunConfig, raw_path: str, titles_path: str,
                 out_path: str) -> dict:
    title_map = corpus_mod.TitleEntityMap.from_json(titles_path)
    counts = {"documents": 0, "mentions": 0, "overlap_dropped": 0}
    seen: set[str] = set()

    def paragraphs():
        with open(raw_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DataError(
                        f"{raw_path}:{lineno}: malformed JSON: {exc.msg}") from exc
                for key in ("id", "lang", "text"):
                    if key not in obj:
                        raise DataError(
                            f"{raw_path}:{lineno}: raw document missing {key!r}")
                if obj["id"] in seen:
                    raise DataError(
                        f"{raw_path}:{lineno}: duplicate document id {obj['id']!r}")
                seen.add(obj["id"])
                text, mentions = corpus_mod.parse_wikitext_links(
                    obj["text"], obj["lang"], title_map)
                para = corpus_mod.Paragraph(
                    id=obj["id"], lang=obj["lang"], text=text, mentions=mentions)
                para, dropped = corpus_mod.validate_paragraph(para, line=lineno)
                counts["documents"] += 1
                counts["mentions"] += len(para.mentions)
                counts["overlap_dropped"] += dropped
                yield para

    corpus_mod.write_paragraphs(paragraphs(), out_path)
    return counts


def stage_index(cfg: RunConfig, paragraphs_path: str, out_path: str) -> dict:
    index = pairing_mod.build_index(corpus_mod.load_paragraphs(paragraphs_path))
    index.to_json(out_path)
    return {"entities": len(index.entities), "paragraphs": len(index.para_lang)}


def stage_pair(cfg: RunConfig, index_path: str, out_path: str) -> dict:
    index = pairing_mod.EntityIndex.from_json(index_path)
    stats = pairing_mod.PairingStats()
    pairs = pairing_mod.collect_pairs(
        index, cfg.pairing.mode, cfg.pairing.max_pairs_per_entity,
        seed=cfg.seed, english_as_target=cfg.pairing.english_as_target,
        stats=stats)
    pairing_mod.write_pairs(pairs, out_path)
    return stats.to_dict()


def stage_filter(cfg: RunConfig, pairs_path: str, counts_path: str,
                 embeddings_path: str, out_path: str) -> dict:
    counts = sidecars.read_subword_counts(counts_path)
    embs = sidecars.read_paragraph_embeddings(embeddings_path)
    counters: dict = {}
    kept = filter_mod.filter_pair_stream(
        pairing_mod.load_pairs(pairs_path), counts, embs, cfg.filter, counters)
    pairing_mod.write_pairs(kept, out_path)
    counters.setdefault("kept", 0)
    return counters


def stage_annotate(cfg: RunConfig, pairs_path: str, paragraphs_path: str,
                   out_path: str, token_embeddings_path: str | None = None,
                   pos_tags_path: str | None = None) -> dict:
    paras = {p.id: p for p in corpus_mod.load_paragraphs(paragraphs_path)}
    embs = tags = None
    if token_embeddings_path or pos_tags_path:
        if not (token_embeddings_path and pos_tags_path):
            raise ConfigError(
                "common-word annotation needs both token embeddings and POS tags")
        embs = sidecars.read_token_embeddings(token_embeddings_path)
        tags = sidecars.read_pos_tags(pos_tags_path)
    counters: dict = {}
    d_wiki: list = []
    d_com: list = []
    for pair in pairing_mod.load_pairs(pairs_path):
        for pid in (pair.src_id, pair.tgt_id):
            if pid not in paras:
                raise DataError(f"pair references unknown paragraph {pid!r}")
        src, tgt = paras[pair.src_id], paras[pair.tgt_id]
        d_wiki.extend(annotate_mod.annotate_wiki(pair, src, tgt, counters))
        if embs is not None:
            d_com.extend(annotate_mod.annotate_common(
                pair, src, tgt, embs, tags, counters=counters))
    merged = annotate_mod.merge_datasets(
        d_wiki, d_com, cfg.annotate.common_fraction, seed=cfg.seed)
    annotate_mod.write_examples(merged, out_path)
    counters.update(wiki_examples=len(d_wiki), common_examples=len(d_com),
                    merged_examples=len(merged))
    return counters


def stage_emit(cfg: RunConfig, examples_path: str, out_path: str) -> dict:
    n = annotate_mod.emit_squad(annotate_mod.load_examples(examples_path), out_path)
    return {"records": n}


def stage_train(cfg: RunConfig, dataset_path: str, model_out: str,
                curve_out: str | None = None) -> dict:
    if not os.path.exists(dataset_path):
        raise DataError(f"training dataset not found: {dataset_path}")
    records = annotate_mod.load_squad(dataset_path)
    if not records:
        raise DataError(f"{dataset_path}: dataset contains no records")
    vocab = sorted({ch for rec in records
                    for ch in rec["question"] + rec["context"]})
    enc_cfg = cfg.model.to_encoder_config(vocab, cfg.seed)
    params = init_params(enc_cfg)
    result = train(params, records, cfg.train)
    save_checkpoint(result.params, model_out)
    if curve_out:
        with open(curve_out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["step", "loss"])
            for step, loss in enumerate(result.loss_curve, start=1):
                writer.writerow([step, f"{loss:.10g}"])
    return {"examples": len(records), "steps": result.steps,
            "skipped_overlength": result.skipped_overlength,
            "final_loss": float(result.loss_curve[-1])}


def stage_align(cfg: RunConfig, model_path: str, sentences_path: str,
                out_path: str, threads: int = 1) -> dict:
    params = load_checkpoint(model_path)
    pairs = align_mod.load_sentence_pairs(sentences_path)

    def one(pair):
        src_tokens, tgt_tokens = pair
        return align_mod.align_pair(
            params, src_tokens, tgt_tokens, threshold=cfg.align.threshold,
            strategy=cfg.align.strategy, min_score=cfg.align.min_score)

    alignments = ordered_map(one, pairs, threads)
    align_mod.write_pharaoh(alignments, out_path)
    return {"sentence_pairs": len(pairs),
            "links": sum(len(a) for a in alignments)}


def stage_eval(cfg: RunConfig, pred_path: str, gold_path: str,
               out_path: str | None = None, fmt: str = "text",
               per_sentence: bool = False, one_based: bool = False,
               stdout=None) -> dict:
    pred = [set(g.possible) for g in eval_mod.load_gold(pred_path)]
    gold = eval_mod.load_gold(gold_path, one_based=one_based)
    metrics = eval_mod.compute_metrics(pred, gold)
    rendered = eval_mod.report(metrics, fmt=fmt, per_sentence=per_sentence)
    print(rendered, end="", file=stdout or sys.stdout)
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(rendered)
    return {"sentences": len(gold), "predicted": metrics.n_a,
            "sure": metrics.n_s, "possible": metrics.n_p,
            "precision": metrics.precision, "recall": metrics.recall,
            "f1": metrics.f1, "aer": metrics.aer}


# ------------------------------------------------------------------ plumbing


def _run_stage(args, cfg: RunConfig, stage: str, fn, input_paths: list[str],
               output_paths: list[str], manifest_anchor: str) -> dict:
    """Run one stage function, then append the manifest entry."""
    manifest = _manifest_path(args, cfg, manifest_anchor)
    started = time.monotonic()
    try:
        counts = fn()
    except WikispanError as err:
        wall = time.monotonic() - started
        try:
            existing_out = [p for p in output_paths if os.path.exists(p)]
            append_manifest(manifest, make_entry(
                stage, [p for p in input_paths if os.path.exists(p)],
                existing_out, {}, cfg, wall, status="failed", error=str(err)))
        except OSError:
            pass
        raise
    wall = time.monotonic() - started
    append_manifest(manifest, make_entry(
        stage, input_paths, output_paths, counts, cfg, wall))
    return counts


def _load_run_config(args) -> RunConfig:
    path = args.config or os.environ.get(CONFIG_ENV_VAR) or None
    cfg = load_config(path)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
        cfg.train.seed = args.seed
    if getattr(args, "threshold", None) is not None:
        cfg.align.threshold = args.threshold
    return cfg


# ------------------------------------------------------------------ commands


def _cmd_ingest(args) -> int:
    cfg = _load_run_config(args)
    raw = _require(args.raw or cfg.paths.raw_docs, "raw_docs")
    titles = _require(args.titles or cfg.paths.title_map, "title_map")
    out = _require(args.out or cfg.paths.paragraphs, "paragraphs")
    counts = _run_stage(args, cfg, "ingest",
                        lambda: stage_ingest(cfg, raw, titles, out),
                        [raw, titles], [out], out)
    print(f"ingest: {counts['documents']} paragraphs, "
          f"{counts['mentions']} mentions -> {out}")
    return 0


def _cmd_index(args) -> int:
    cfg = _load_run_config(args)
    paragraphs = _require(args.paragraphs or cfg.paths.paragraphs, "paragraphs")
    out = _require(args.out or cfg.paths.index, "index")
    counts = _run_stage(args, cfg, "index",
                        lambda: stage_index(cfg, paragraphs, out),
                        [paragraphs], [out], out)
    print(f"index: {counts['entities']} entities over "
          f"{counts['paragraphs']} paragraphs -> {out}")
    return 0


def _cmd_pair(args) -> int:
    cfg = _load_run_config(args)
    if args.mode:
        cfg.pairing.mode = args.mode
    if args.cap is not None:
        cfg.pairing.max_pairs_per_entity = args.cap
    if args.english_as_target:
        cfg.pairing.english_as_target = True
    index = _require(args.index or cfg.paths.index, "index")
    out = _require(args.out or cfg.paths.pairs, "pairs")
    counts = _run_stage(args, cfg, "pair",
                        lambda: stage_pair(cfg, index, out),
                        [index], [out], out)
    print(f"pair: {counts['emitted']} pairs from "
          f"{counts['entities_paired']} entities -> {out}")
    return 0


def _cmd_filter(args) -> int:
    cfg = _load_run_config(args)
    pairs = _require(args.pairs or cfg.paths.pairs, "pairs")
    counts_path = _require(args.subword_counts or cfg.paths.subword_counts,
                           "subword_counts")
    embs = _require(args.embeddings or cfg.paths.paragraph_embeddings,
                    "paragraph_embeddings")
    out = _require(args.out or cfg.paths.filtered_pairs, "filtered_pairs")
    counts = _run_stage(args, cfg, "filter",
                        lambda: stage_filter(cfg, pairs, counts_path, embs, out),
                        [pairs, counts_path, embs], [out], out)
    print(f"filter: kept {counts.get('kept', 0)} pairs "
          f"(length drops {counts.get('dropped_length', 0)}, "
          f"similarity drops {counts.get('dropped_similarity', 0)}) -> {out}")
    return 0


def _cmd_annotate(args) -> int:
    cfg = _load_run_config(args)
    if args.common_fraction is not None:
        cfg.annotate.common_fraction = args.common_fraction
    pairs = _require(args.pairs or cfg.paths.filtered_pairs, "filtered_pairs")
    paragraphs = _require(args.paragraphs or cfg.paths.paragraphs, "paragraphs")
    out = _require(args.out or cfg.paths.examples, "examples")
    tok = args.token_embeddings or cfg.paths.token_embeddings
    pos = args.pos_tags or cfg.paths.pos_tags
    inputs = [pairs, paragraphs] + [p for p in (tok, pos) if p]
    counts = _run_stage(
        args, cfg, "annotate",
        lambda: stage_annotate(cfg, pairs, paragraphs, out, tok, pos),
        inputs, [out], out)
    print(f"annotate: {counts['merged_examples']} examples "
          f"({counts['wiki_examples']} wiki, {counts['common_examples']} common) "
          f"-> {out}")
    return 0


def _cmd_emit(args) -> int:
    cfg = _load_run_config(args)
    examples = _require(args.examples or cfg.paths.examples, "examples")
    out = _require(args.out or cfg.paths.dataset, "dataset")
    counts = _run_stage(args, cfg, "emit",
                        lambda: stage_emit(cfg, examples, out),
                        [examples], [out], out)
    print(f"emit: {counts['records']} records -> {out}")
    return 0


def _cmd_train(args) -> int:
    cfg = _load_run_config(args)
    if args.steps is not None:
        cfg.train.total_steps = args.steps
        if cfg.train.warmup_steps > args.steps:
            cfg.train.warmup_steps = args.steps
    dataset = _require(args.dataset or cfg.paths.dataset, "dataset")
    model_out = _require(args.model_out or cfg.paths.checkpoint, "checkpoint")
    curve = args.loss_curve or cfg.paths.loss_curve
    outputs = [model_out] + ([curve] if curve else [])
    counts = _run_stage(
        args, cfg, "train",
        lambda: stage_train(cfg, dataset, model_out, curve),
        [dataset], outputs, model_out)
    print(f"train: {counts['steps']} steps over {counts['examples']} examples, "
          f"final loss {counts['final_loss']:.4f} -> {model_out}")
    return 0


def _cmd_align(args) -> int:
    cfg = _load_run_config(args)
    model = _require(args.model or cfg.paths.checkpoint, "checkpoint")
    sentences = _require(args.sentences or cfg.paths.sentences, "sentences")
    out = _require(args.out or cfg.paths.alignments, "alignments")
    counts = _run_stage(
        args, cfg, "align",
        lambda: stage_align(cfg, model, sentences, out, threads=args.threads),
        [model, sentences], [out], out)
    print(f"align: {counts['links']} links over "
          f"{counts['sentence_pairs']} sentence pairs -> {out}")
    return 0


def _cmd_eval(args) -> int:
    cfg = _load_run_config(args)
    pred = _require(args.pred or cfg.paths.alignments, "alignments")
    gold = _require(args.gold or cfg.paths.gold, "gold")
    out = args.out or cfg.paths.report
    outputs = [out] if out else []
    _run_stage(
        args, cfg, "eval",
        lambda: stage_eval(cfg, pred, gold, out, fmt=args.format,
                           per_sentence=args.per_sentence,
                           one_based=args.one_based),
        [pred, gold], outputs, out or pred)
    return 0


def _cmd_stats(args) -> int:
    cfg = _load_run_config(args)
    path = args.manifest or cfg.paths.manifest
    if not path:
        raise ConfigError("stats needs --manifest or paths.manifest")
    doc = read_manifest(path)
    print(f"{'stage':<10} {'status':<8} {'wall_s':>8}  counts")
    for entry in doc["entries"]:
        counts = " ".join(f"{k}={v}" for k, v in sorted(entry["counts"].items()))
        print(f"{entry['stage']:<10} {entry['status']:<8} "
              f"{entry['wall_time_s']:>8.2f}  {counts}")
    return 0


def _cmd_pipeline(args) -> int:
    cfg = _load_run_config(args)
    workdir = args.workdir or cfg.paths.workdir
    if not workdir:
        raise ConfigError("pipeline needs --workdir or paths.workdir")
    os.makedirs(workdir, exist_ok=True)

    def art(name: str, configured: str | None) -> str:
        return configured or os.path.join(workdir, name)

    raw = _require(cfg.paths.raw_docs, "raw_docs")
    titles = _require(cfg.paths.title_map, "title_map")
    counts_path = _require(cfg.paths.subword_counts, "subword_counts")
    para_embs = _require(cfg.paths.paragraph_embeddings, "paragraph_embeddings")
    sentences = _require(cfg.paths.sentences, "sentences")
    gold = _require(cfg.paths.gold, "gold")
    tok_embs = cfg.paths.token_embeddings
    pos_tags = cfg.paths.pos_tags

    paragraphs = art("paragraphs.jsonl", cfg.paths.paragraphs)
    index = art("index.json", cfg.paths.index)
    pairs = art("pairs.jsonl", cfg.paths.pairs)
    filtered = art("filtered_pairs.jsonl", cfg.paths.filtered_pairs)
    examples = art("examples.jsonl", cfg.paths.examples)
    dataset = art("dataset.json", cfg.paths.dataset)
    checkpoint = art("model.wspc", cfg.paths.checkpoint)
    curve = art("loss_curve.csv", cfg.paths.loss_curve)
    alignments = art("alignments.txt", cfg.paths.alignments)
    report = art("report.json", cfg.paths.report)
    if not getattr(args, "manifest", None) and not cfg.paths.manifest:
        args.manifest = os.path.join(workdir, "manifest.json")

    _run_stage(args, cfg, "ingest",
               lambda: stage_ingest(cfg, raw, titles, paragraphs),
               [raw, titles], [paragraphs], paragraphs)
    _run_stage(args, cfg, "index",
               lambda: stage_index(cfg, paragraphs, index),
               [paragraphs], [index], index)
    _run_stage(args, cfg, "pair",
               lambda: stage_pair(cfg, index, pairs),
               [index], [pairs], pairs)
    _run_stage(args, cfg, "filter",
               lambda: stage_filter(cfg, pairs, counts_path, para_embs, filtered),
               [pairs, counts_path, para_embs], [filtered], filtered)
    annotate_inputs = [filtered, paragraphs] + [p for p in (tok_embs, pos_tags) if p]
    _run_stage(args, cfg, "annotate",
               lambda: stage_annotate(cfg, filtered, paragraphs, examples,
                                      tok_embs, pos_tags),
               annotate_inputs, [examples], examples)
    _run_stage(args, cfg, "emit",
               lambda: stage_emit(cfg, examples, dataset),
               [examples], [dataset], dataset)
    _run_stage(args, cfg, "train",
               lambda: stage_train(cfg, dataset, checkpoint, curve),
               [dataset], [checkpoint, curve], checkpoint)
    _run_stage(args, cfg, "align",
               lambda: stage_align(cfg, checkpoint, sentences, alignments,
                                   threads=args.threads),
               [checkpoint, sentences], [alignments], alignments)
    _run_stage(args, cfg, "eval",
               lambda: stage_eval(cfg, alignments, gold, report, fmt="json"),
               [alignments, gold], [report], report)
    print(f"pipeline: artifacts in {workdir}")
    return 0


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wikispan",
                     description="Weak-supervision word alignment toolkit")
    common = _Parser(add_help=False)
    common.add_argument("--config", help=f"run config YAML "
                        f"(default: ${CONFIG_ENV_VAR})")
    common.add_argument("--seed", type=int, help="override the global seed")
    common.add_argument("--manifest", help="manifest file to append to")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common],
                       help="parse raw linked documents into paragraph JSONL")
    p.add_argument("--raw")
    p.add_argument("--titles")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("index", parents=[common],
                       help="build the entity -> paragraphs index")
    p.add_argument("--paragraphs")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_index)

    p = sub.add_parser("pair", parents=[common],
                       help="emit co-mention paragraph pairs")
    p.add_argument("--index")
    p.add_argument("--out")
    p.add_argument("--mode", choices=pairing_mod.MODES)
    p.add_argument("--cap", type=int, help="max pairs per entity")
    p.add_argument("--english-as-target", action="store_true")
    p.set_defaults(func=_cmd_pair)

    p = sub.add_parser("filter", parents=[common],
                       help="drop pairs by length bounds and similarity")
    p.add_argument("--pairs")
    p.add_argument("--subword-counts")
    p.add_argument("--embeddings")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("annotate", parents=[common],
                       help="auto-annotate word alignments on pairs")
    p.add_argument("--pairs")
    p.add_argument("--paragraphs")
    p.add_argument("--token-embeddings")
    p.add_argument("--pos-tags")
    p.add_argument("--common-fraction", type=float)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_annotate)

    p = sub.add_parser("emit", parents=[common],
                       help="emit the span-prediction training dataset")
    p.add_argument("--examples")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_emit)

    p = sub.add_parser("train", parents=[common],
                       help="train the span predictor")
    p.add_argument("--dataset")
    p.add_argument("--model-out")
    p.add_argument("--loss-curve")
    p.add_argument("--steps", type=int, help="override train.total_steps")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("align", parents=[common],
                       help="align tokenized sentence pairs")
    p.add_argument("--model")
    p.add_argument("--sentences")
    p.add_argument("--out")
    p.add_argument("--threshold", type=float)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("eval", parents=[common],
                       help="score predicted alignments against gold")
    p.add_argument("--pred")
    p.add_argument("--gold")
    p.add_argument("--out")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--per-sentence", action="store_true")
    p.add_argument("--one-based", action="store_true",
                   help="gold file uses 1-based indices")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("pipeline", parents=[common],
                       help="run every stage in order")
    p.add_argument("--workdir")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("stats", parents=[common],
                       help="summarize a manifest")
    p.set_defaults(func=_cmd_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except DataError as err:
        print(f"data error: {err}", file=sys.stderr)
        return 2
    except WikispanError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except OSError as err:
        print(f"data error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # pragma: no cover - safety net
        print(f"internal error: {type(err).__name__}: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
