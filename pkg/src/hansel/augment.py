"""Build hansel, gretel, and vanilla training records from a corpus.

The three record shapes share a source and differ in how the target length is
conveyed:

- *hansel*: the prompt carries no length text; the output is the reference
  with an opening remaining-length token plus periodic countdown tokens
  spliced in at unit boundaries, a zero token at the effective length, and up
  to ``residual_max`` reference words left after the zero token.
- *gretel*: the target length is written into the prompt ("Answer in 17
  words."); the output is the reference verbatim.
- *vanilla*: no length information anywhere; output verbatim.

Residuals teach graceful sentence completion: a seeded fraction of examples
treats the reference as ``residual`` words longer than the token trail claims,
so the trail's zero token arrives before the text ends.

Mix composition follows fixed shares with largest-remainder rounding: the
vanilla share is taken first, then the gretel share is taken from what
remains (only for a hansel-targeted mix).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import (
    FRAMEWORK_GRETEL,
    FRAMEWORK_HANSEL,
    FRAMEWORK_VANILLA,
    FRAMEWORK_VANILLA_STAR,
    HanselConfig,
)
from .corpus import TASK_DIALOGUE, TASK_SUMMARIZATION, Example
from .errors import ConfigError, EmptyReferenceError
from .protocol import opening_token, placement_positions
from .tokens import SpecialToken
from .units import LengthUnit, TokenAdapter, boundary_offset, segment

_SEED_TAG_RESIDUALS = 101
_SEED_TAG_MIX = 202

_UNIT_NOUNS = {
    LengthUnit.WORD: "words",
    LengthUnit.SENTENCE: "sentences",
    LengthUnit.CHARACTER: "characters",
    LengthUnit.TOKEN: "tokens",
}


@dataclass(frozen=True)
class MaskDirective:
    """Label-mask instruction for downstream finetuning.

    ``anchor`` is the character offset of the zero token in the output text;
    the ``n`` model tokens immediately preceding it are to be excluded from
    the training loss.  Applying the mask is tokenizer work and happens
    outside this package.
    """

    anchor: int
    n: int
    span_units: str = "model-tokens"


@dataclass(frozen=True)
class AugmentedExample:
    id: str
    framework: str
    source: str
    prompt: str
    output: str
    target_length: int
    effective_length: int
    residual: int
    unit: LengthUnit | tuple[LengthUnit, ...]
    mask_directive: MaskDirective | None = None

    def to_record(self) -> dict:
        units = self.unit if isinstance(self.unit, tuple) else (self.unit,)
        return {
            "id": self.id,
            "framework": self.framework,
            "source": self.source,
            "prompt": self.prompt,
            "output": self.output,
            "target_length": self.target_length,
            "effective_length": self.effective_length,
            "residual": self.residual,
            "mask_anchor": self.mask_directive.anchor if self.mask_directive else None,
            "unit": units[0].value if len(units) == 1 else [u.value for u in units],
        }


@dataclass(frozen=True)
class MixManifest:
    counts: dict[str, int]
    assignments: tuple[tuple[str, str, int], ...]  # (id, framework, residual)
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "counts": dict(self.counts),
            "assignments": [
                {"id": i, "framework": f, "residual": r} for i, f, r in self.assignments
            ],
            "warnings": list(self.warnings),
        }


def unit_noun(unit: LengthUnit) -> str:
    return _UNIT_NOUNS[unit]


def length_clause(lengths: Sequence[tuple[LengthUnit, int]]) -> str:
    """Render "17 words" or "4 sentences and 20 words" from (unit, count) pairs."""
    return " and ".join(f"{n} {unit_noun(u)}" for u, n in lengths)


def task_prompt(task: str, lengths: Sequence[tuple[LengthUnit, int]] | None = None) -> str:
    """Prompt text for a task, optionally carrying a target-length clause."""
    if task == TASK_SUMMARIZATION:
        if lengths is None:
            return "Summarize."
        return f"Summarize. Answer in {length_clause(lengths)}."
    if task == TASK_DIALOGUE:
        if lengths is None:
            return "Reply."
        return f"Reply in {length_clause(lengths)}."
    raise ConfigError(f"unknown task {task!r}")


def _family_counts(
    reference: str, cfg: HanselConfig, token_adapter: TokenAdapter | None
) -> list[tuple[LengthUnit, int]]:
    return [
        (unit, segment(reference, unit, token_adapter=token_adapter).count)
        for unit, _ in cfg.families
    ]


def augment_vanilla(
    ex: Example, cfg: HanselConfig, *, token_adapter: TokenAdapter | None = None
) -> AugmentedExample:
    counts = _family_counts(ex.reference, cfg, token_adapter)
    length = counts[-1][1]
    if length == 0:
        raise EmptyReferenceError(f"example {ex.id} has an empty reference")
    return AugmentedExample(
        id=ex.id,
        framework=FRAMEWORK_VANILLA,
        source=ex.source,
        prompt=task_prompt(ex.task),
        output=ex.reference,
        target_length=length,
        effective_length=length,
        residual=0,
        unit=cfg.unit,
    )


def augment_gretel(
    ex: Example, cfg: HanselConfig, *, token_adapter: TokenAdapter | None = None
) -> AugmentedExample:
    counts = _family_counts(ex.reference, cfg, token_adapter)
    length = counts[-1][1]
    if length == 0:
        raise EmptyReferenceError(f"example {ex.id} has an empty reference")
    return AugmentedExample(
        id=ex.id,
        framework=FRAMEWORK_GRETEL,
        source=ex.source,
        prompt=task_prompt(ex.task, counts),
        output=ex.reference,
        target_length=length,
        effective_length=length,
        residual=0,
        unit=cfg.unit,
    )


def augment_hansel(
    ex: Example,
    cfg: HanselConfig,
    residual: int = 0,
    *,
    token_adapter: TokenAdapter | None = None,
) -> AugmentedExample:
    """Splice the remaining-length token trail into the reference.

    The residual shortens the trail of the residual family only: its zero
    token lands ``residual`` units before the end of the reference and the
    remaining reference words follow unchanged.
    """
    reference = ex.reference
    residual_unit, _ = cfg.residual_family
    counts = _family_counts(reference, cfg, token_adapter)
    length = dict(counts)[residual_unit]
    if length == 0:
        raise EmptyReferenceError(f"example {ex.id} has an empty reference")
    if residual < 0 or residual > min(cfg.residual_max, length - 1):
        raise ConfigError(
            f"residual {residual} outside [0, min(residual_max={cfg.residual_max}, "
            f"length-1={length - 1})] for example {ex.id}"
        )

    insertions: list[tuple[int, int, str, bool]] = []  # offset, rank, text, is_anchor
    for rank, (unit, delta) in enumerate(cfg.families):
        seg = segment(reference, unit, token_adapter=token_adapter)
        effective = seg.count - (residual if unit is residual_unit else 0)
        opener = opening_token(effective, delta, unit)
        trail: list[tuple[int, SpecialToken]] = [(0, opener)]
        for pos, remaining in placement_positions(effective, delta):
            major, minor = divmod(remaining, delta)
            trail.append((pos, SpecialToken(unit=unit, major=major, minor=minor)))
        for pos, token in trail:
            offset = boundary_offset(reference, seg, pos)
            is_anchor = unit is residual_unit and token.remaining(delta) == 0
            insertions.append((offset, rank, cfg.rendering.render(token), is_anchor))

    insertions.sort(key=lambda t: (t[0], t[1]))
    parts: list[str] = []
    prev = 0
    anchor = None
    out_len = 0
    for offset, _, rendered, is_anchor in insertions:
        parts.append(reference[prev:offset])
        out_len += offset - prev
        if is_anchor:
            anchor = out_len
        parts.append(rendered)
        out_len += len(rendered)
        prev = offset
    parts.append(reference[prev:])
    output = "".join(parts)
    assert anchor is not None

    return AugmentedExample(
        id=ex.id,
        framework=FRAMEWORK_HANSEL,
        source=ex.source,
        prompt=task_prompt(ex.task),
        output=output,
        target_length=length,
        effective_length=length - residual,
        residual=residual,
        unit=cfg.unit,
        mask_directive=MaskDirective(anchor=anchor, n=cfg.mask_n),
    )


def augment_multi_unit(
    ex: Example,
    cfg: HanselConfig,
    residual: int = 0,
    *,
    token_adapter: TokenAdapter | None = None,
) -> AugmentedExample:
    """Multi-family augmentation; identical to augment_hansel under the
    multi-unit config, kept as a named entry point."""
    return augment_hansel(ex, cfg, residual, token_adapter=token_adapter)


def assign_residuals(
    corpus: Sequence[Example],
    cfg: HanselConfig,
    *,
    token_adapter: TokenAdapter | None = None,
) -> dict[str, int]:
    """Draw residuals for a seeded fraction of the corpus.

    The selected share (rounded half up) draws uniformly from 1..residual_max;
    everyone else gets 0.  References with at most ``residual_max`` units keep
    residual 0 regardless, so the trail never claims a non-positive length.
    """
    residuals = {ex.id: 0 for ex in corpus}
    if cfg.residual_max == 0 or cfg.residual_fraction == 0.0 or not corpus:
        return residuals
    n = len(corpus)
    n_selected = int(math.floor(cfg.residual_fraction * n + 0.5))
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, _SEED_TAG_RESIDUALS]))
    order = rng.permutation(n)
    draws = rng.integers(1, cfg.residual_max + 1, size=n_selected)
    residual_unit, _ = cfg.residual_family
    for idx, value in zip(order[:n_selected], draws):
        ex = corpus[int(idx)]
        length = segment(ex.reference, residual_unit, token_adapter=token_adapter).count
        if length > cfg.residual_max:
            residuals[ex.id] = int(value)
    return residuals


def _largest_remainder(total: int, fractions: Sequence[float]) -> list[int]:
    quotas = [total * f for f in fractions]
    base = [int(math.floor(q)) for q in quotas]
    leftover = total - sum(base)
    order = sorted(range(len(fractions)), key=lambda i: (-(quotas[i] - base[i]), i))
    for i in order[:leftover]:
        base[i] += 1
    return base


def mix_counts(n: int, cfg: HanselConfig, target_framework: str) -> dict[str, int]:
    """Per-framework record counts for a corpus of size ``n``."""
    n_vanilla, n_rest = _largest_remainder(n, [cfg.vanilla_fraction, 1.0 - cfg.vanilla_fraction])
    if target_framework == FRAMEWORK_HANSEL:
        n_gretel, n_hansel = _largest_remainder(
            n_rest, [cfg.gretel_within_nonvanilla, 1.0 - cfg.gretel_within_nonvanilla]
        )
    elif target_framework == FRAMEWORK_GRETEL:
        n_gretel, n_hansel = n_rest, 0
    else:
        raise ConfigError(f"mix target must be hansel or gretel, got {target_framework!r}")
    return {
        FRAMEWORK_VANILLA: n_vanilla,
        FRAMEWORK_GRETEL: n_gretel,
        FRAMEWORK_HANSEL: n_hansel,
    }


def compose_mix(
    corpus: Sequence[Example],
    cfg: HanselConfig,
    target_framework: str = FRAMEWORK_HANSEL,
    *,
    token_adapter: TokenAdapter | None = None,
) -> tuple[list[AugmentedExample], MixManifest]:
    """Assign every example to a framework bucket and augment accordingly.

    Bucket sizes follow the configured fractions with largest-remainder
    rounding; which example lands where is a seeded permutation.  Output
    preserves corpus order, and no example is duplicated or dropped.
    """
    if not corpus:
        raise ConfigError("cannot compose a mix from an empty corpus")
    n = len(corpus)
    counts = mix_counts(n, cfg, target_framework)
    warnings: list[str] = []
    for name, want in (
        ("vanilla", cfg.vanilla_fraction),
        ("gretel", cfg.gretel_within_nonvanilla if target_framework == FRAMEWORK_HANSEL else None),
    ):
        if want and n * want < 1:
            warnings.append(
                f"corpus of {n} examples is smaller than the {name} bucket granularity"
            )

    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, _SEED_TAG_MIX]))
    order = rng.permutation(n)
    framework_by_index = {}
    cursor = 0
    for framework in (FRAMEWORK_VANILLA, FRAMEWORK_GRETEL, FRAMEWORK_HANSEL):
        for idx in order[cursor : cursor + counts[framework]]:
            framework_by_index[int(idx)] = framework
        cursor += counts[framework]

    residuals = assign_residuals(corpus, cfg, token_adapter=token_adapter)
    out: list[AugmentedExample] = []
    assignments: list[tuple[str, str, int]] = []
    for i, ex in enumerate(corpus):
        framework = framework_by_index[i]
        if framework == FRAMEWORK_HANSEL:
            residual = residuals[ex.id]
            rec = augment_hansel(ex, cfg, residual, token_adapter=token_adapter)
        elif framework == FRAMEWORK_GRETEL:
            residual = 0
            rec = augment_gretel(ex, cfg, token_adapter=token_adapter)
        else:
            residual = 0
            rec = augment_vanilla(ex, cfg, token_adapter=token_adapter)
        out.append(rec)
        assignments.append((ex.id, framework, residual))

    manifest = MixManifest(
        counts=counts, assignments=tuple(assignments), warnings=tuple(warnings)
    )
    return out, manifest


def compose_single(
    corpus: Sequence[Example],
    cfg: HanselConfig,
    framework: str,
    *,
    token_adapter: TokenAdapter | None = None,
) -> tuple[list[AugmentedExample], MixManifest]:
    """Augment every example with one framework, no mixing."""
    if framework == FRAMEWORK_HANSEL:
        residuals = assign_residuals(corpus, cfg, token_adapter=token_adapter)
        out = [
            augment_hansel(ex, cfg, residuals[ex.id], token_adapter=token_adapter)
            for ex in corpus
        ]
    elif framework == FRAMEWORK_GRETEL:
        out = [augment_gretel(ex, cfg, token_adapter=token_adapter) for ex in corpus]
    elif framework == FRAMEWORK_VANILLA:
        out = [augment_vanilla(ex, cfg, token_adapter=token_adapter) for ex in corpus]
    else:
        raise ConfigError(f"unknown framework {framework!r}")
    manifest = MixManifest(
        counts={framework: len(out)},
        assignments=tuple((rec.id, rec.framework, rec.residual) for rec in out),
    )
    return out, manifest


def build_inference_context(
    source: str,
    task: str,
    target_length: int | Sequence[int],
    framework: str,
    cfg: HanselConfig,
) -> str:
    """Compose the generation context for a target length.

    Gretel and vanilla* contexts state the target in the prompt; hansel
    contexts additionally end with the opening token(s), which act as the
    switch that turns length control on.  Plain vanilla omits the length.
    """
    targets = list(target_length) if isinstance(target_length, (list, tuple)) else [target_length]
    if len(targets) != len(cfg.families):
        raise ConfigError(
            f"{len(cfg.families)} configured families need {len(cfg.families)} targets, "
            f"got {len(targets)}"
        )
    for t in targets:
        if t < 1:
            raise ConfigError(f"target length must be >= 1, got {t}")
    lengths = [(unit, t) for (unit, _), t in zip(cfg.families, targets)]

    if framework == FRAMEWORK_VANILLA:
        prompt = task_prompt(task)
    elif framework in (FRAMEWORK_GRETEL, FRAMEWORK_VANILLA_STAR, FRAMEWORK_HANSEL):
        prompt = task_prompt(task, lengths)
    else:
        raise ConfigError(f"unknown framework {framework!r}")

    context = f"{source}\n{prompt}" if source else prompt
    if framework == FRAMEWORK_HANSEL:
        openers = "".join(
            cfg.rendering.render(opening_token(t, delta, unit))
            for (unit, delta), t in zip(cfg.families, targets)
        )
        context = f"{context} {openers}"
    return context


def records_to_jsonl_dicts(records: Iterable[AugmentedExample]) -> Iterable[dict]:
    for rec in records:
        yield rec.to_record()


def augmented_from_record(d: dict, *, mask_n: int = 10) -> AugmentedExample:
    """Rebuild an AugmentedExample from its JSONL dict.

    The mask width is not stored per record (it is a config constant), so it
    must be supplied when the directive matters downstream.
    """
    raw_unit = d.get("unit", LengthUnit.WORD.value)
    if isinstance(raw_unit, list):
        unit: LengthUnit | tuple[LengthUnit, ...] = tuple(LengthUnit.parse(u) for u in raw_unit)
    else:
        unit = LengthUnit.parse(raw_unit)
    anchor = d.get("mask_anchor")
    return AugmentedExample(
        id=str(d["id"]),
        framework=str(d["framework"]),
        source=str(d.get("source", "")),
        prompt=str(d["prompt"]),
        output=str(d["output"]),
        target_length=int(d["target_length"]),
        effective_length=int(d["effective_length"]),
        residual=int(d.get("residual", 0)),
        unit=unit,
        mask_directive=MaskDirective(anchor=int(anchor), n=mask_n) if anchor is not None else None,
    )


def read_augmented(path, *, mask_n: int = 10) -> list[AugmentedExample]:
    from .corpus import iter_jsonl
    from .errors import CorpusError

    records = []
    for line_no, d in iter_jsonl(path):
        try:
            records.append(augmented_from_record(d, mask_n=mask_n))
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusError(f"bad augmented record: {exc}", line_no) from None
    return records
