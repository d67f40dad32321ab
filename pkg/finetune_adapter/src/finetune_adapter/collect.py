"""Converting model generations back into evaluation-harness input.

Model output records carry the generated text (possibly token-bearing), the
inference context whose final rendered token states the target, and
optionally the generation's model-token count.  The converter strips the
special tokens, recovers the target length from the context token, and
passes a cap-hit flag through for the harness's infinite-generation
accounting (a word counter downstream cannot see model-token caps).
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import RecordError
from .masking import iter_jsonl
from .wire import WireFormat


def collect_record(
    record: dict,
    *,
    delta: int,
    max_tokens: int = 1722,
    wire: WireFormat | None = None,
) -> dict:
    wire = wire or WireFormat()
    generated = record.get("generated", "")
    target = None
    context = record.get("context")
    if context:
        target = wire.context_target(context, delta)
    if target is None:
        target = record.get("target_length")
    if target is None:
        raise RecordError(
            f"record {record.get('id')!r} has neither a context token nor target_length"
        )
    out = {
        "id": record.get("id", ""),
        "generated": wire.strip(generated),
        "target_length": int(target),
    }
    n_tokens = record.get("n_tokens")
    if record.get("infinite") or (n_tokens is not None and int(n_tokens) >= max_tokens):
        out["infinite"] = True
    return out


def collect_generations(
    inputs_path: str | Path,
    out_path: str | Path,
    *,
    delta: int,
    max_tokens: int = 1722,
    wire: WireFormat | None = None,
) -> int:
    n = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        for line_no, record in iter_jsonl(inputs_path):
            try:
                out = collect_record(record, delta=delta, max_tokens=max_tokens, wire=wire)
            except RecordError as exc:
                raise RecordError(str(exc), line_no) from None
            fh.write(json.dumps(out, ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n
