"""Materializing label masks from augmented records.

Each augmented record becomes one training sequence, the concatenation
``source \\n prompt \\n output`` (the output already carries the token trail
for trail records).  Labels mirror the input ids except for the masked
window: the ``mask_n`` model tokens immediately preceding the zero token are
set to the ignore index, clamped to the number of output tokens actually
available before it.  Tokens in the window are masked regardless of kind;
special tokens outside it stay supervised.  The zero token's position comes
from the record's ``mask_anchor`` (a character offset into the output), so
no re-parsing of the trail is needed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from tokenizers import Tokenizer

from .errors import AdapterError, CorruptRecordError, RecordError
from .wire import UNIT_CODES, WireFormat

IGNORE_INDEX = -100


@dataclass(frozen=True)
class MaskedSequence:
    id: str
    framework: str
    input_ids: tuple[int, ...]
    labels: tuple[int, ...]
    n_masked: int

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "framework": self.framework,
            "input_ids": list(self.input_ids),
            "labels": list(self.labels),
            "n_masked": self.n_masked,
        }


def training_text(record: dict) -> str:
    source = record.get("source", "")
    prompt = record["prompt"]
    output = record["output"]
    head = f"{source}\n{prompt}" if source else prompt
    return f"{head}\n{output}"


def residual_unit_code(record: dict) -> str:
    unit = record.get("unit", "word")
    if isinstance(unit, list):
        unit = unit[-1]
    try:
        return UNIT_CODES[unit]
    except KeyError:
        raise RecordError(f"unknown unit {unit!r} in record {record.get('id')}") from None


def iter_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                yield line_no, json.loads(raw)
            except json.JSONDecodeError as exc:
                raise RecordError(f"invalid JSON: {exc.msg}", line_no) from None


def mask_record(
    record: dict,
    tokenizer: Tokenizer,
    *,
    mask_n: int = 10,
    mask_prompt: bool = False,
    wire: WireFormat | None = None,
) -> MaskedSequence:
    """Tokenize one augmented record and materialize its label mask."""
    wire = wire or WireFormat()
    text = training_text(record)
    encoding = tokenizer.encode(text)
    ids = list(encoding.ids)
    offsets = list(encoding.offsets)

    decoded = tokenizer.decode(ids, skip_special_tokens=False)
    if decoded != text:
        raise AdapterError(
            f"tokenizer does not round-trip record {record.get('id')!r}; "
            "register the special tokens first and use a lossless tokenizer"
        )

    output_base = len(text) - len(record["output"])
    labels = list(ids)
    if mask_prompt:
        for i, (_, end) in enumerate(offsets):
            if end <= output_base:
                labels[i] = IGNORE_INDEX

    n_masked = 0
    anchor = record.get("mask_anchor")
    if anchor is not None:
        zero_rendered = wire.render(residual_unit_code(record), 0, 0)
        zero_id = tokenizer.token_to_id(zero_rendered)
        anchor_global = output_base + int(anchor)
        zero_index = None
        for i, (start, _) in enumerate(offsets):
            if start == anchor_global and ids[i] == zero_id:
                zero_index = i
                break
        if zero_index is None:
            raise CorruptRecordError(
                f"record {record.get('id')!r} has no {zero_rendered} at its mask anchor"
            )
        output_start = next(
            (i for i, (start, _) in enumerate(offsets) if start >= output_base), len(ids)
        )
        available = zero_index - output_start
        n_masked = min(mask_n, available)
        for i in range(zero_index - n_masked, zero_index):
            labels[i] = IGNORE_INDEX

    return MaskedSequence(
        id=str(record.get("id", "")),
        framework=str(record.get("framework", "")),
        input_ids=tuple(ids),
        labels=tuple(labels),
        n_masked=n_masked,
    )


def materialize_masks(
    records_path: str | Path,
    tokenizer: Tokenizer,
    out_path: str | Path,
    *,
    mask_n: int = 10,
    mask_prompt: bool = False,
    wire: WireFormat | None = None,
) -> int:
    """Convert an augmented JSONL file into a masked training file."""
    n = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        for line_no, record in iter_jsonl(records_path):
            try:
                seq = mask_record(
                    record, tokenizer, mask_n=mask_n, mask_prompt=mask_prompt, wire=wire
                )
            except KeyError as exc:
                raise RecordError(f"missing field {exc}", line_no) from None
            fh.write(json.dumps(seq.to_dict(), ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n
