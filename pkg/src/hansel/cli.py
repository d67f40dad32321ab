"""Command-line interface.

Subcommands: augment, validate, evaluate, sweep, simulate, stats, judge, and
make-corpus.  Every command accepts ``--config FILE`` (JSON, same field names
as HanselConfig) and flag overrides win over the file, which wins over the
built-in defaults.  All artifacts are byte-deterministic for a fixed seed:
run ids derive from the config and input digests, and timings go to stderr
only.

Exit codes: 0 success, 1 validation or evaluation failure, 2 usage error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from .augment import (
    compose_mix,
    compose_single,
    read_augmented,
)
from .config import (
    FRAMEWORK_GRETEL,
    FRAMEWORK_HANSEL,
    FRAMEWORKS,
    HanselConfig,
    load_config,
)
from .corpus import TASKS, read_corpus, write_jsonl
from .errors import ConfigError, CorpusError, HanselError, NoDataError
from .evaluation import (
    EvalRecord,
    corpus_stats,
    evaluate,
    grid_table,
    read_generations,
    sweep_hyperparams,
    sweep_targets,
    write_grid_csv,
    write_report_json,
    write_target_rows_csv,
    write_target_rows_dat,
)
from .ngram import MODE_FREE, MODE_PROTOCOL, make_ngram_generator, train_ngram
from .protocol import validate as validate_stream
from .rule_follower import RuleFollowerConfig, make_grid_cell_runner, rule_follow
from .synthetic import make_corpus, write_dialog_fixture
from .tokens import parse_stream, strip_tokens
from .units import LengthUnit

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_IO = 3


# --------------------------------------------------------------------------
# Helpers
# --------------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated integer list, got {text!r}")


def _unit_list(text: str) -> list[LengthUnit]:
    return [LengthUnit.parse(u) for u in text.split(",") if u.strip()]


def resolve_config(args: argparse.Namespace) -> HanselConfig:
    """Built-in defaults, then config file, then explicit flags."""
    cfg = load_config(args.config) if getattr(args, "config", None) else HanselConfig()
    overrides: dict = {}
    delta = getattr(args, "delta", None)
    if delta is not None:
        overrides["delta"] = delta[0] if len(delta) == 1 else tuple(delta)
    units = getattr(args, "unit", None)
    if units is not None:
        overrides["unit"] = units[0] if len(units) == 1 else tuple(units)
    residual = getattr(args, "residual_max", None)
    if residual is not None:
        if len(residual) != 1:
            raise ConfigError("this command takes a single --residual-max value")
        overrides["residual_max"] = residual[0]
    for flag, name in (
        ("seed", "seed"),
        ("residual_fraction", "residual_fraction"),
        ("vanilla_fraction", "vanilla_fraction"),
        ("gretel_fraction", "gretel_within_nonvanilla"),
        ("mask_n", "mask_n"),
        ("max_tokens", "max_tokens"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[name] = value
    template = getattr(args, "template", None)
    compact = getattr(args, "compact_template", None)
    if template is not None or compact is not None:
        from .tokens import TokenRendering

        base = cfg.rendering
        overrides["rendering"] = TokenRendering(
            template=template if template is not None else base.template,
            compact_template=compact if compact is not None else base.compact_template,
        )
    return cfg.with_overrides(**overrides)


def _digest_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()[:12]


def run_stamp(cfg: HanselConfig, command: str, input_paths: list[str]) -> dict:
    digests = {str(p): _digest_file(p) for p in input_paths}
    blob = json.dumps(
        {"command": command, "config": cfg.to_dict(), "inputs": digests}, sort_keys=True
    )
    return {
        "run_id": hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12],
        "command": command,
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "inputs": digests,
        "version": __version__,
    }


@contextmanager
def atomic_output(path: str | Path):
    """Write to a sibling temp file; publish on success, remove on failure."""
    path = Path(path)
    tmp = path.with_name(path.name + ".part")
    try:
        yield tmp
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _add_config_flags(p: argparse.ArgumentParser, *, residual_list: bool = False) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--delta", type=_int_list, help="stride (comma list for multi-unit or grid)")
    p.add_argument(
        "--residual-max",
        dest="residual_max",
        type=_int_list,
        help="max words after the zero token" + (" (comma list for grid)" if residual_list else ""),
    )
    p.add_argument("--unit", type=_unit_list, help="length unit(s), e.g. word or sentence,word")
    p.add_argument("--seed", type=int, help="deterministic seed")
    p.add_argument("--residual-fraction", dest="residual_fraction", type=float)
    p.add_argument("--vanilla-fraction", dest="vanilla_fraction", type=float)
    p.add_argument("--gretel-fraction", dest="gretel_fraction", type=float)
    p.add_argument("--mask-n", dest="mask_n", type=int)
    p.add_argument("--max-tokens", dest="max_tokens", type=int)
    p.add_argument("--template", help="full token template, e.g. '<|len:{unit}:{major}:{minor}|>'")
    p.add_argument("--compact-template", dest="compact_template",
                   help="zero-minor token template, e.g. '<|len:{unit}:{major}|>'")


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def cmd_augment(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    corpus = read_corpus(args.input, max_reference_units=cfg.max_tokens)
    if args.framework in (FRAMEWORK_HANSEL, FRAMEWORK_GRETEL) and not args.no_mix:
        records, manifest = compose_mix(corpus, cfg, args.framework)
    else:
        records, manifest = compose_single(corpus, cfg, args.framework)

    stamp = run_stamp(cfg, "augment", [args.input])
    with atomic_output(args.out) as tmp:
        write_jsonl(tmp, (rec.to_record() for rec in records))
    manifest_path = args.manifest or f"{args.out}.manifest.json"
    with atomic_output(manifest_path) as tmp:
        payload = {"run": stamp, **manifest.to_dict()}
        Path(tmp).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(
        f"augmented {len(records)} examples -> {args.out} "
        f"(counts: {json.dumps(manifest.counts, sort_keys=True)})"
    )
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    lines = 0
    bad = 0
    problems: list[dict] = []
    for rec in read_augmented(args.input, mask_n=cfg.mask_n):
        lines += 1
        if rec.framework == FRAMEWORK_HANSEL:
            verdict = validate_stream(rec.output, cfg)
            if not verdict.ok:
                bad += 1
                problems.append({"id": rec.id, **verdict.to_dict()})
        else:
            stream = parse_stream(rec.output, cfg.rendering)
            if stream.tokens:
                bad += 1
                problems.append(
                    {
                        "id": rec.id,
                        "ok": False,
                        "violations": [
                            {
                                "position": t.offset,
                                "kind": "unexpected-token",
                                "detail": f"{rec.framework} output must not contain special tokens",
                            }
                            for t in stream.tokens
                        ],
                    }
                )
    report = {
        "lines": lines,
        "invalid": bad,
        "ok": bad == 0,
        "problems": problems,
    }
    if lines == 0:
        report["warning"] = "input contained no records"
    if args.report:
        with atomic_output(args.report) as tmp:
            Path(tmp).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(json.dumps({k: report[k] for k in ("lines", "invalid", "ok")}, sort_keys=True))
    if problems:
        first = problems[0]["violations"][0]
        print(
            f"first violation: id={problems[0]['id']} kind={first['kind']} "
            f"offset={first['position']}",
            file=sys.stderr,
        )
    return EXIT_OK if bad == 0 else EXIT_FAILURE


def _join_references(records: list[EvalRecord], corpus_path: str | None) -> list[EvalRecord]:
    if not corpus_path:
        return records
    from dataclasses import replace

    refs = {ex.id: ex.reference for ex in read_corpus(corpus_path)}
    return [replace(r, reference=refs.get(r.id, r.reference)) for r in records]


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    unit = cfg.residual_family[0]
    records = read_generations(args.input, unit=unit)
    records = _join_references(records, args.references)
    report = evaluate(records, cfg)
    stamp = run_stamp(cfg, "evaluate", [args.input])
    if args.out:
        with atomic_output(args.out) as tmp:
            write_report_json(report, tmp, extra={"run": stamp})
    print(json.dumps(report.to_dict(), sort_keys=True))
    return EXIT_OK


def _build_generator(args, cfg: HanselConfig, corpus):
    """Generator factory for sweep/simulate: the exact rule follower or an
    n-gram trained on the fly from a framework mix."""
    name = args.generator
    if name == "rule":
        rf = RuleFollowerConfig(seed=cfg.seed)
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 11]))

        def gen(context: str) -> str:
            return rule_follow(context, cfg, rf, rng=rng)

        return gen, FRAMEWORK_HANSEL
    if name in ("ngram-hansel", "ngram-gretel"):
        framework = FRAMEWORK_HANSEL if name.endswith("hansel") else FRAMEWORK_GRETEL
        if args.train:
            records = read_augmented(args.train, mask_n=cfg.mask_n)
        else:
            if corpus is None:
                raise ConfigError(f"--generator {name} needs --input corpus or --train records")
            records, _ = compose_mix(corpus, cfg, framework)
        model = train_ngram(records, cfg.rendering, order=args.order, alpha=args.alpha)
        mode = MODE_PROTOCOL if framework == FRAMEWORK_HANSEL else MODE_FREE
        cap = min(cfg.max_tokens, args.generation_cap)
        return make_ngram_generator(model, cfg, mode, max_len=cap, seed=cfg.seed), framework
    raise ConfigError(f"unknown generator {name!r}")


def cmd_sweep(args: argparse.Namespace) -> int:
    grid_mode = args.grid or (args.delta and len(args.delta) > 1) or (
        args.residual_max and len(args.residual_max) > 1
    )
    if grid_mode and args.targets is not None:
        raise ConfigError("--targets cannot be combined with a stride/residual grid")

    corpus = read_corpus(args.input) if args.input else None
    if corpus is None:
        raise ConfigError("sweep needs --input corpus")

    if grid_mode:
        import copy

        deltas = args.delta or [10, 20, 40]
        residuals = args.residual_max or [0, 1, 3, 5]
        scalar_args = copy.copy(args)
        scalar_args.delta = None
        scalar_args.residual_max = None
        base = resolve_config(scalar_args)
        rf = RuleFollowerConfig(seed=base.seed)
        cells = sweep_hyperparams(
            corpus, deltas, residuals, make_grid_cell_runner(rf), base
        )
        print(grid_table(cells))
        if args.csv:
            with atomic_output(args.csv) as tmp:
                write_grid_csv(cells, tmp)
        return EXIT_OK

    cfg = resolve_config(args)
    targets = args.targets or [5, 20, 50, 80, 130]
    generator, framework = _build_generator(args, cfg, corpus)
    sources = [ex.source for ex in corpus[: args.count]] if args.count else [
        ex.source for ex in corpus
    ]
    task = corpus[0].task
    rows = sweep_targets(generator, sources, targets, cfg, task=task, framework=framework)
    print("target  mae      scored  infinite  failed")
    for row in rows:
        print(
            f"{row.target:>6}  {row.report.mae:<8.3f} {row.report.n_scored:>6}  "
            f"{row.report.n_infinite:>8}  {row.n_failed:>6}"
        )
    if args.csv:
        with atomic_output(args.csv) as tmp:
            write_target_rows_csv(rows, tmp)
    if args.dat:
        with atomic_output(args.dat) as tmp:
            write_target_rows_dat(rows, tmp)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    corpus = read_corpus(args.input)
    generator_name = {"rule": "rule", "ngram-free": "ngram-gretel", "ngram-protocol": "ngram-hansel"}[
        args.mode
    ]
    args.generator = generator_name
    generator, framework = _build_generator(args, cfg, corpus)
    targets = args.targets or [5, 20, 50, 80, 130]
    sources = [ex.source for ex in corpus[: args.count]] if args.count else [
        ex.source for ex in corpus
    ]
    task = corpus[0].task
    from .augment import build_inference_context

    rows = []
    for target in targets:
        for i, source in enumerate(sources):
            context = build_inference_context(source, task, target, framework, cfg)
            text = generator(context)
            rows.append(
                {
                    "id": f"t{target}-{i}",
                    "generated": strip_tokens(text, cfg.rendering),
                    "target_length": target,
                }
            )
    with atomic_output(args.out) as tmp:
        write_jsonl(tmp, rows)
    print(f"simulated {len(rows)} generations -> {args.out}")
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    unit = cfg.residual_family[0]
    corpus = read_corpus(args.input)
    stats = corpus_stats(corpus, unit)
    payload = {**stats.to_dict(), "unit": unit.value}
    if args.out:
        stamp = run_stamp(cfg, "stats", [args.input])
        with atomic_output(args.out) as tmp:
            Path(tmp).write_text(
                json.dumps({**payload, "run": stamp}, indent=2, sort_keys=True) + "\n",
                encoding="utf-8",
            )
    print(json.dumps(payload, sort_keys=True))
    return EXIT_OK


def cmd_judge(args: argparse.Namespace) -> int:
    from concurrent.futures import ThreadPoolExecutor

    from .corpus import iter_jsonl
    from .judge import JudgeClient, JudgeConfig

    jcfg = JudgeConfig(
        endpoint=args.endpoint,
        model=args.model,
        api_key_env=args.api_key_env,
        timeout=args.timeout,
        max_retries=args.retries,
        cache_dir=args.cache_dir,
        temperature=args.temperature,
        max_in_flight=args.max_in_flight,
    )
    rows = []
    for line_no, d in iter_jsonl(args.input):
        if "source" not in d or "generated" not in d:
            raise CorpusError("record needs source and generated fields", line_no)
        rows.append((d.get("id", f"line-{line_no}"), d))
    results = []
    with JudgeClient(jcfg) as client:
        # bounded in-flight requests; output order follows input order
        with ThreadPoolExecutor(max_workers=max(1, jcfg.max_in_flight)) as pool:
            scores = pool.map(
                lambda row: client.judge(
                    row[1]["source"], row[1]["generated"], row[1].get("task", args.task)
                ),
                rows,
            )
            for (rec_id, _), score in zip(rows, scores):
                results.append({"id": rec_id, **score.to_dict()})
    with atomic_output(args.out) as tmp:
        write_jsonl(tmp, results)
    print(f"judged {len(results)} records -> {args.out}")
    return EXIT_OK


def cmd_make_corpus(args: argparse.Namespace) -> int:
    if args.dialog_fixture:
        n = write_dialog_fixture(args.out, n=args.n, seed=args.seed)
    else:
        corpus = make_corpus(args.n, seed=args.seed, task=args.task)
        n = write_jsonl(args.out, (ex.to_dict() for ex in corpus))
    print(f"wrote {n} examples -> {args.out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hansel",
        description="Length-control dataset augmentation and evaluation toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("augment", help="build training records from a corpus")
    p.add_argument("--input", required=True, help="Example corpus JSONL")
    p.add_argument("--out", required=True, help="augmented records JSONL")
    p.add_argument("--manifest", help="mix manifest path (default: OUT.manifest.json)")
    p.add_argument("--framework", choices=FRAMEWORKS, default=FRAMEWORK_HANSEL)
    p.add_argument("--no-mix", action="store_true", help="augment every record with --framework")
    _add_config_flags(p)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("validate", help="check augmented records against the token protocol")
    p.add_argument("--input", required=True, help="augmented records JSONL")
    p.add_argument("--report", help="write the full verdict report JSON here")
    _add_config_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("evaluate", help="score generations against targets and references")
    p.add_argument("--input", required=True, help="generations JSONL (id, generated, target_length)")
    p.add_argument("--references", help="Example corpus JSONL to join references by id")
    p.add_argument("--out", help="report JSON path")
    _add_config_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="per-target sweep or stride/residual grid")
    p.add_argument("--input", required=True, help="Example corpus JSONL")
    p.add_argument("--targets", type=_int_list, help="target lengths (per-target mode)")
    p.add_argument("--grid", action="store_true", help="force grid mode")
    p.add_argument("--generator", choices=("rule", "ngram-hansel", "ngram-gretel"), default="rule")
    p.add_argument("--train", help="pre-augmented records JSONL for the n-gram generators")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--generation-cap", dest="generation_cap", type=int, default=400)
    p.add_argument("--count", type=int, help="use only the first N sources")
    p.add_argument("--csv", help="write rows/cells CSV here")
    p.add_argument("--dat", help="write a two-column plot file here (per-target mode)")
    _add_config_flags(p, residual_list=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="drive a desk generator into evaluation input JSONL")
    p.add_argument("--input", required=True, help="Example corpus JSONL (sources)")
    p.add_argument("--out", required=True, help="generations JSONL")
    p.add_argument("--mode", choices=("rule", "ngram-free", "ngram-protocol"), default="rule")
    p.add_argument("--targets", type=_int_list)
    p.add_argument("--train", help="pre-augmented records JSONL for the n-gram modes")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--generation-cap", dest="generation_cap", type=int, default=400)
    p.add_argument("--count", type=int, help="use only the first N sources")
    _add_config_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stats", help="corpus reference-length statistics")
    p.add_argument("--input", required=True, help="Example corpus JSONL")
    p.add_argument("--out", help="stats JSON path")
    _add_config_flags(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("judge", help="LLM-judge quality scoring over generations")
    p.add_argument("--input", required=True, help="JSONL with id, source, generated[, task]")
    p.add_argument("--out", required=True, help="scores JSONL")
    p.add_argument("--endpoint", required=True, help="chat-completions URL")
    p.add_argument("--model", required=True)
    p.add_argument("--task", choices=TASKS, default="summarization")
    p.add_argument("--api-key-env", dest="api_key_env", default="JUDGE_API_KEY")
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--retries", type=int, default=3)
    p.add_argument("--cache-dir", dest="cache_dir")
    p.add_argument("--temperature", type=float, default=0.0)
    p.add_argument("--max-in-flight", dest="max_in_flight", type=int, default=4)
    p.set_defaults(func=cmd_judge)

    p = sub.add_parser("make-corpus", help="write a bundled synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--task", choices=TASKS, default="dialogue")
    p.add_argument("--dialog-fixture", action="store_true",
                   help="skewed dialogue-format fixture instead of the template corpus")
    p.set_defaults(func=cmd_make_corpus)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.monotonic()
    try:
        code = args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CorpusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except NoDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except HanselError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    finally:
        elapsed = time.monotonic() - started
        print(f"[{elapsed:.2f}s]", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
