"""Command-line entry point.

    wsbridge export {tokens|paragraphs|pos|subwords} \
        --model NAME --in FILE --out FILE [--batch-size N]

Exit codes: 0 success, 1 usage, 2 bad input data or unknown model,
3 unexpected internal failure.
"""

from __future__ import annotations

import argparse
import sys

from . import export
from .errors import BridgeError, DataError, ModelError
from .sidecar_io import read_paragraphs


class _UsageError(BridgeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # raise instead of exiting directly
        raise _UsageError(f"{self.prog}: {message}")


_KINDS = {
    "tokens": (export.export_token_embeddings, export.DEFAULT_ENCODER),
    "paragraphs": (export.export_paragraph_embeddings,
                   export.DEFAULT_ENCODER),
    "pos": (export.export_pos_tags, export.DEFAULT_TAGGER),
    "subwords": (export.export_subword_counts, export.DEFAULT_COUNTER),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wsbridge",
                     description="Export embedding/POS/subword sidecar "
                                 "files from paragraph JSONL.")
    sub = parser.add_subparsers(dest="command", required=True)
    exp = sub.add_parser("export", help="run one export")
    kinds = exp.add_subparsers(dest="kind", required=True)
    for kind, (_, default_model) in _KINDS.items():
        k = kinds.add_parser(kind)
        k.add_argument("--model", default=default_model,
                       help=f"model name (default: {default_model})")
        k.add_argument("--in", dest="in_path", required=True,
                       help="paragraph JSONL input")
        k.add_argument("--out", dest="out_path", required=True,
                       help="sidecar output file")
        k.add_argument("--batch-size", type=int,
                       default=export.DEFAULT_BATCH_SIZE,
                       help="paragraphs per inference batch")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.batch_size < 1:
            raise _UsageError("--batch-size must be at least 1")
        run, _ = _KINDS[args.kind]
        paragraphs = read_paragraphs(args.in_path)
        stats = run(paragraphs, args.model, args.out_path,
                    batch_size=args.batch_size)
        summary = " ".join(f"{key}={value}" for key, value in stats.items())
        print(f"wrote {args.out_path}: {summary}")
        return 0
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ModelError, DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BridgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
