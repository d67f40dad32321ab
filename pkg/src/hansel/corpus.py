"""Corpus data model and JSONL ingestion.

A corpus is a UTF-8 JSONL file with one example per line:

    {"id": "...", "source": "...", "reference": "...", "task": "summarization",
     "meta": {"...": "..."}}

``task`` is ``summarization`` or ``dialogue``; ``meta`` is optional.  Ids must
be unique and references non-empty after trimming.  Examples longer than the
configured cap are truncated at ingestion, before any length counting.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import CorpusError
from .units import LengthUnit, segment

TASK_SUMMARIZATION = "summarization"
TASK_DIALOGUE = "dialogue"
TASKS = (TASK_SUMMARIZATION, TASK_DIALOGUE)


@dataclass(frozen=True)
class Example:
    id: str
    source: str
    reference: str
    task: str = TASK_SUMMARIZATION
    meta: Mapping[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "source": self.source,
            "reference": self.reference,
            "task": self.task,
        }
        if self.meta:
            d["meta"] = dict(self.meta)
        return d


def truncate_reference(reference: str, max_units: int) -> str:
    """Cut a reference after ``max_units`` words; shorter text is unchanged."""
    seg = segment(reference, LengthUnit.WORD)
    if seg.count <= max_units:
        return reference
    return reference[: seg.spans[max_units - 1][1]]


def example_from_dict(d: dict, *, line: int | None = None) -> Example:
    try:
        ex_id = d["id"]
        source = d.get("source", "")
        reference = d["reference"]
    except KeyError as exc:
        raise CorpusError(f"missing field {exc}", line) from None
    task = d.get("task", TASK_SUMMARIZATION)
    if task not in TASKS:
        raise CorpusError(f"unknown task {task!r}", line)
    if not isinstance(reference, str) or not reference.strip():
        raise CorpusError("reference is empty", line)
    meta = d.get("meta") or {}
    if not isinstance(meta, dict):
        raise CorpusError("meta must be an object", line)
    return Example(id=str(ex_id), source=str(source), reference=reference, task=task, meta=meta)


def iter_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                yield line_no, json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"invalid JSON: {exc.msg}", line_no) from None


def read_corpus(path: str | Path, *, max_reference_units: int | None = None) -> list[Example]:
    """Read and validate an Example corpus; raises CorpusError with line numbers."""
    examples: list[Example] = []
    seen: set[str] = set()
    for line_no, d in iter_jsonl(path):
        ex = example_from_dict(d, line=line_no)
        if ex.id in seen:
            raise CorpusError(f"duplicate id {ex.id!r}", line_no)
        seen.add(ex.id)
        if max_reference_units is not None:
            ex = Example(
                id=ex.id,
                source=ex.source,
                reference=truncate_reference(ex.reference, max_reference_units),
                task=ex.task,
                meta=ex.meta,
            )
        examples.append(ex)
    return examples


def write_jsonl(path: str | Path, records: Iterable[dict]) -> int:
    """Write dict records as JSONL; returns the number of lines written."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n
