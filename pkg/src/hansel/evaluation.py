"""Length-control and quality evaluation.

Generated texts are scored against their target lengths (mean absolute
error), against references (ROUGE-1/2/L), and audited for degenerate infinite
generation.  Flagged records are excluded from score aggregates but counted,
so ``n_scored + n_infinite`` always equals the input size.

Two sweep shapes are provided: a per-target extrapolation sweep (one report
per requested target length) and a stride/residual hyperparameter grid, each
emitting machine-readable rows for tables and plots.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .augment import build_inference_context
from .config import FRAMEWORK_HANSEL, HanselConfig
from .corpus import Example, iter_jsonl
from .errors import CorpusError, NoDataError
from .rouge import rouge
from .tokens import strip_tokens
from .units import LengthUnit, TokenAdapter, segment

REPETITION_NGRAM = 4
REPETITION_MIN_REPEATS = 8


@dataclass(frozen=True)
class EvalRecord:
    id: str
    generated: str
    target_length: int
    reference: str = ""
    infinite_flag: bool = False
    unit: LengthUnit = LengthUnit.WORD


@dataclass(frozen=True)
class EvalReport:
    mae: float
    n_scored: int
    n_infinite: int
    per_target: dict[int, float] = field(default_factory=dict)
    rouge1: float | None = None
    rouge2: float | None = None
    rougeL: float | None = None

    def to_dict(self) -> dict:
        return {
            "mae": self.mae,
            "rouge1": self.rouge1,
            "rouge2": self.rouge2,
            "rougeL": self.rougeL,
            "n_scored": self.n_scored,
            "n_infinite": self.n_infinite,
            "per_target": {str(k): v for k, v in sorted(self.per_target.items())},
        }


@dataclass(frozen=True)
class CorpusStats:
    mean: float
    std: float
    max: int
    min: int
    count: int

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std": self.std,
            "max": self.max,
            "min": self.min,
            "count": self.count,
        }


def detect_infinite(
    generated: str,
    cfg: HanselConfig,
    *,
    ngram_size: int = REPETITION_NGRAM,
    min_repeats: int = REPETITION_MIN_REPEATS,
) -> bool:
    """Heuristic for degenerate unbounded output.

    Fires when the text reaches the generation cap (``cfg.max_tokens``,
    counted in words here since no tokenizer is available) or when a block of
    at most ``ngram_size`` words repeats back to back across a region at
    least ``ngram_size * (min_repeats - 1)`` words long -- the size a
    ``min_repeats``-fold repetition of a full n-gram would cover.
    """
    words = generated.split()
    if len(words) >= cfg.max_tokens:
        return True
    need = ngram_size * (min_repeats - 1)
    if len(words) < need + 1:
        return False
    for period in range(1, ngram_size + 1):
        run = 0
        for j in range(len(words) - period):
            if words[j] == words[j + period]:
                run += 1
                if run >= need:
                    return True
            else:
                run = 0
    return False


def flag_infinite(records: Sequence[EvalRecord], cfg: HanselConfig) -> list[EvalRecord]:
    """Return records with infinite flags set by the detector.

    An already-set flag is honored (upstream pipelines may know a generation
    hit a hard token cap that word counting cannot see).
    """
    return [
        rec
        if rec.infinite_flag
        else replace(rec, infinite_flag=detect_infinite(rec.generated, cfg))
        for rec in records
    ]


def _length(rec: EvalRecord, token_adapter: TokenAdapter | None) -> int:
    return segment(rec.generated, rec.unit, token_adapter=token_adapter).count


def mae(
    records: Sequence[EvalRecord],
    *,
    token_adapter: TokenAdapter | None = None,
) -> float:
    """Mean absolute deviation of generated length from target length.

    Flagged records are excluded; if nothing remains there is no data to
    average and NoDataError is raised.
    """
    scored = [r for r in records if not r.infinite_flag]
    if not scored:
        raise NoDataError("all records are flagged as infinite generations")
    errors = [abs(_length(r, token_adapter) - r.target_length) for r in scored]
    return float(np.mean(errors))


def evaluate(
    records: Sequence[EvalRecord],
    cfg: HanselConfig,
    *,
    token_adapter: TokenAdapter | None = None,
    stemmer: Callable[[str], str] | None = None,
) -> EvalReport:
    """Aggregate MAE, ROUGE, and infinite-generation accounting."""
    flagged = flag_infinite(records, cfg)
    scored = [r for r in flagged if not r.infinite_flag]
    n_infinite = len(flagged) - len(scored)
    overall = mae(flagged, token_adapter=token_adapter)

    per_target: dict[int, float] = {}
    for target in sorted({r.target_length for r in scored}):
        group = [r for r in scored if r.target_length == target]
        per_target[target] = mae(group, token_adapter=token_adapter)

    with_refs = [r for r in scored if r.reference.strip()]
    rouge_means: dict[str, float | None] = {"r1": None, "r2": None, "rL": None}
    if with_refs:
        for variant in ("r1", "r2", "rL"):
            scores = [
                rouge(r.generated, r.reference, variant, stemmer=stemmer).f1
                for r in with_refs
            ]
            rouge_means[variant] = float(np.mean(scores))

    return EvalReport(
        mae=overall,
        n_scored=len(scored),
        n_infinite=n_infinite,
        per_target=per_target,
        rouge1=rouge_means["r1"],
        rouge2=rouge_means["r2"],
        rougeL=rouge_means["rL"],
    )


def corpus_stats(
    corpus: Sequence[Example],
    unit: LengthUnit = LengthUnit.WORD,
    *,
    token_adapter: TokenAdapter | None = None,
) -> CorpusStats:
    """Population statistics of reference lengths."""
    if not corpus:
        raise NoDataError("cannot compute statistics of an empty corpus")
    lengths = np.array(
        [segment(ex.reference, unit, token_adapter=token_adapter).count for ex in corpus]
    )
    return CorpusStats(
        mean=float(lengths.mean()),
        std=float(lengths.std()),
        max=int(lengths.max()),
        min=int(lengths.min()),
        count=int(lengths.size),
    )


# --------------------------------------------------------------------------
# Sweeps
# --------------------------------------------------------------------------

Generator = Callable[[str], str]


@dataclass(frozen=True)
class TargetSweepRow:
    target: int
    report: EvalReport
    n_failed: int = 0


def sweep_targets(
    generator: Generator,
    sources: Sequence[str],
    targets: Sequence[int],
    cfg: HanselConfig,
    *,
    task: str = "summarization",
    framework: str = FRAMEWORK_HANSEL,
    token_adapter: TokenAdapter | None = None,
) -> list[TargetSweepRow]:
    """Per-target extrapolation sweep.

    For every target length, inference contexts are built for all sources,
    the generator is invoked, special tokens are stripped, and a report is
    aggregated.  A generator exception skips that record and is counted in
    ``n_failed``.
    """
    if not targets:
        raise NoDataError("target list is empty")
    unit = cfg.residual_family[0]
    rows: list[TargetSweepRow] = []
    for target in targets:
        records: list[EvalRecord] = []
        failed = 0
        for i, source in enumerate(sources):
            context = build_inference_context(source, task, target, framework, cfg)
            try:
                text = generator(context)
            except Exception:
                failed += 1
                continue
            records.append(
                EvalRecord(
                    id=f"t{target}-{i}",
                    generated=strip_tokens(text, cfg.rendering),
                    target_length=target,
                    unit=unit,
                )
            )
        report = evaluate(records, cfg, token_adapter=token_adapter)
        rows.append(TargetSweepRow(target=target, report=report, n_failed=failed))
    return rows


@dataclass(frozen=True)
class GridCell:
    delta: int
    residual_max: int
    mae: float


CellRunner = Callable[[Sequence[Example], HanselConfig], float]


def sweep_hyperparams(
    corpus: Sequence[Example],
    deltas: Sequence[int],
    residual_maxes: Sequence[int],
    cell_runner: CellRunner,
    cfg: HanselConfig,
) -> list[GridCell]:
    """Full stride x residual grid; each cell runs the supplied pipeline.

    The pipeline receives the corpus and a config with that cell's stride and
    residual cap (same base seed), and returns the cell's MAE.
    """
    if not deltas or not residual_maxes:
        raise NoDataError("stride and residual lists must be non-empty")
    cells: list[GridCell] = []
    for delta in deltas:
        for residual_max in residual_maxes:
            cell_cfg = cfg.with_overrides(delta=delta, residual_max=residual_max)
            cells.append(
                GridCell(
                    delta=delta,
                    residual_max=residual_max,
                    mae=cell_runner(corpus, cell_cfg),
                )
            )
    return cells


# --------------------------------------------------------------------------
# Readers and writers
# --------------------------------------------------------------------------


def read_generations(path: str | Path, unit: LengthUnit = LengthUnit.WORD) -> list[EvalRecord]:
    """Read evaluation input JSONL: id, generated, target_length [, reference, infinite]."""
    records: list[EvalRecord] = []
    for line_no, d in iter_jsonl(path):
        try:
            records.append(
                EvalRecord(
                    id=str(d["id"]),
                    generated=str(d["generated"]),
                    target_length=int(d["target_length"]),
                    reference=str(d.get("reference", "")),
                    infinite_flag=bool(d.get("infinite", False)),
                    unit=unit,
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusError(f"bad generation record: {exc}", line_no) from None
    return records


def write_report_json(report: EvalReport, path: str | Path, extra: dict | None = None) -> None:
    payload = report.to_dict()
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_target_rows_csv(rows: Sequence[TargetSweepRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["target", "mae", "n_scored", "n_infinite", "n_failed"])
        for row in rows:
            writer.writerow(
                [row.target, row.report.mae, row.report.n_scored, row.report.n_infinite, row.n_failed]
            )


def write_target_rows_dat(rows: Sequence[TargetSweepRow], path: str | Path) -> None:
    """Two-column plot file (target, mae), gnuplot style."""
    lines = ["# target mae"]
    lines += [f"{row.target} {row.report.mae}" for row in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_grid_csv(cells: Sequence[GridCell], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["delta", "residual_max", "mae"])
        for cell in cells:
            writer.writerow([cell.delta, cell.residual_max, cell.mae])


def grid_table(cells: Sequence[GridCell]) -> str:
    """Render the grid as a stride-by-residual text table."""
    deltas = sorted({c.delta for c in cells})
    residuals = sorted({c.residual_max for c in cells})
    lookup = {(c.delta, c.residual_max): c.mae for c in cells}
    header = "delta\\residual " + " ".join(f"{r:>8}" for r in residuals)
    lines = [header]
    for d in deltas:
        cells_fmt = " ".join(
            f"{lookup.get((d, r), float('nan')):8.3f}" for r in residuals
        )
        lines.append(f"{d:>14} {cells_fmt}")
    return "\n".join(lines)
