"""Command-line interface mirroring the augmentation toolkit's flag names.

Subcommands: train-tokenizer (offline byte-level BPE), register (add the
token inventory to a tokenizer), materialize (augmented JSONL -> masked
training file), collect (model outputs -> evaluation-harness input).
"""

from __future__ import annotations

import argparse
import json
import sys

from .collect import collect_generations
from .errors import AdapterError
from .masking import materialize_masks
from .registration import max_major_for_length, register_tokens
from .tokenizer_io import (
    corpus_text_lines,
    load_tokenizer,
    save_tokenizer,
    train_byte_level_tokenizer,
)
from .wire import UNIT_CODES, WireFormat

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _wire(args: argparse.Namespace) -> WireFormat:
    return WireFormat(template=args.template, compact_template=args.compact_template)


def cmd_train_tokenizer(args: argparse.Namespace) -> int:
    tokenizer = train_byte_level_tokenizer(
        corpus_text_lines(args.input), vocab_size=args.vocab_size
    )
    save_tokenizer(tokenizer, args.out)
    print(f"trained tokenizer ({tokenizer.get_vocab_size()} items) -> {args.out}")
    return EXIT_OK


def cmd_register(args: argparse.Namespace) -> int:
    tokenizer = load_tokenizer(args.tokenizer)
    if args.max_major is not None:
        max_major = args.max_major
    elif args.max_length is not None:
        max_major = max_major_for_length(args.max_length, args.delta)
    else:
        raise AdapterError("register needs --max-major or --max-length")
    unit_code = UNIT_CODES.get(args.unit, args.unit)
    registration = register_tokens(
        tokenizer, args.delta, max_major, unit_code=unit_code, wire=_wire(args)
    )
    save_tokenizer(tokenizer, args.out or args.tokenizer)
    print(
        json.dumps(
            {
                "registered": len(registration.tokens),
                "max_major": max_major,
                "embedding_init": registration.embedding_init,
                "id_range": [min(registration.ids), max(registration.ids)],
            },
            sort_keys=True,
        )
    )
    return EXIT_OK


def cmd_materialize(args: argparse.Namespace) -> int:
    tokenizer = load_tokenizer(args.tokenizer)
    n = materialize_masks(
        args.input,
        tokenizer,
        args.out,
        mask_n=args.mask_n,
        mask_prompt=args.mask_prompt,
        wire=_wire(args),
    )
    print(f"materialized {n} sequences -> {args.out}")
    return EXIT_OK


def cmd_collect(args: argparse.Namespace) -> int:
    n = collect_generations(
        args.input, args.out, delta=args.delta, max_tokens=args.max_tokens, wire=_wire(args)
    )
    print(f"collected {n} generations -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finetune-adapter",
        description="Bridge from length-trail augmented JSONL to finetuning artifacts",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_wire_flags(p):
        p.add_argument("--template", default=WireFormat().template)
        p.add_argument(
            "--compact-template", dest="compact_template",
            default=WireFormat().compact_template,
        )

    p = sub.add_parser("train-tokenizer", help="train an offline byte-level BPE on a corpus")
    p.add_argument("--input", required=True, help="corpus or augmented JSONL")
    p.add_argument("--out", required=True, help="tokenizer JSON path")
    p.add_argument("--vocab-size", dest="vocab_size", type=int, default=2000)
    p.set_defaults(func=cmd_train_tokenizer)

    p = sub.add_parser("register", help="add the rendered token inventory to a tokenizer")
    p.add_argument("--tokenizer", required=True, help="tokenizer JSON path")
    p.add_argument("--out", help="save path (default: overwrite --tokenizer)")
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--max-major", dest="max_major", type=int)
    p.add_argument("--max-length", dest="max_length", type=int,
                   help="derive the max major from the corpus's longest reference")
    p.add_argument("--unit", default="word")
    add_wire_flags(p)
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("materialize", help="augmented JSONL -> masked training file")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tokenizer", required=True)
    p.add_argument("--mask-n", dest="mask_n", type=int, default=10)
    p.add_argument("--mask-prompt", dest="mask_prompt", action="store_true",
                   help="also exclude source/prompt tokens from the loss")
    add_wire_flags(p)
    p.set_defaults(func=cmd_materialize)

    p = sub.add_parser("collect", help="model outputs -> evaluation-harness JSONL")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--max-tokens", dest="max_tokens", type=int, default=1722)
    add_wire_flags(p)
    p.set_defaults(func=cmd_collect)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
