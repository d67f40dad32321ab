"""LLM-judge client for quality scoring of generations.

One chat-completions request per category, each using a criteria description,
step-by-step evaluation instructions, and a form-filled numeric answer.  The
response must contain exactly one integer inside the category's declared
scale; anything else is a scoring-parse error (never silently clamped, since
clamping would corrupt model comparisons).

Responses are cached on disk keyed by (model, prompt) content hash, so
re-judging a corpus is free and deterministic.  Per-category raw scores are
always kept; the single average is the arithmetic mean of the raw values
across categories, mixed scales and all, and both forms are reported.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from dataclasses import dataclass
from pathlib import Path

import httpx

from .corpus import TASK_DIALOGUE, TASK_SUMMARIZATION
from .errors import ConfigError, JudgeUnavailableError, ScoreParseError


@dataclass(frozen=True)
class Category:
    name: str
    lo: int
    hi: int
    description: str


CATEGORIES: dict[str, tuple[Category, ...]] = {
    TASK_SUMMARIZATION: (
        Category("coherence", 1, 5, "the summary reads as a well-structured, well-organized body of information"),
        Category("consistency", 1, 5, "the summary contains only statements entailed by the source"),
        Category("fluency", 1, 3, "the summary's sentences are grammatical and natural"),
        Category("relevance", 1, 5, "the summary selects the important content from the source"),
    ),
    TASK_DIALOGUE: (
        Category("naturalness", 1, 5, "the response sounds like something a person would say"),
        Category("coherence", 1, 5, "the response fits the conversation so far"),
        Category("engagingness", 1, 3, "the response is interesting rather than dull or generic"),
        Category("groundedness", 1, 5, "the response uses the given context correctly"),
    ),
}


@dataclass(frozen=True)
class JudgeConfig:
    endpoint: str
    model: str
    api_key_env: str = "JUDGE_API_KEY"
    timeout: float = 30.0
    max_retries: int = 3
    cache_dir: str | None = None
    temperature: float = 0.0
    max_in_flight: int = 4
    backoff: float = 1.0  # seconds; doubles per retry


@dataclass(frozen=True)
class QualityScore:
    task: str
    scores: dict[str, int]
    average: float

    def to_dict(self) -> dict:
        return {"task": self.task, "scores": dict(self.scores), "average": self.average}


def category_prompt(category: Category, task: str, source: str, generated: str) -> str:
    unit = "summary" if task == TASK_SUMMARIZATION else "response"
    steps = (
        f"Evaluation steps:\n"
        f"1. Read the source carefully.\n"
        f"2. Read the {unit} and compare it against the source.\n"
        f"3. Rate {category.name} on a scale of {category.lo} to {category.hi}: "
        f"{category.description}.\n"
        f"4. Think through your reasoning first, then fill in the form."
    )
    form = (
        f"Form (fill in the number only):\n{category.name} ({category.lo}-{category.hi}):"
    )
    return (
        f"You will be given one {unit} written for a source text. "
        f"Your task is to rate the {unit} on one metric: {category.name} "
        f"(scale {category.lo}-{category.hi}).\n\n{steps}\n\n"
        f"Source:\n{source}\n\n{unit.capitalize()}:\n{generated}\n\n{form}"
    )


_SCORE_RE = re.compile(r"^\s*(?:[a-z]+\s*\((?:\d+)-(?:\d+)\)\s*:)?\s*(\d+)\s*\.?\s*$", re.IGNORECASE)


def parse_score(raw: str, category: Category) -> int:
    """Strictly extract the single in-scale integer from a judge reply."""
    m = _SCORE_RE.match(raw.strip())
    if not m:
        raise ScoreParseError(
            f"judge reply for {category.name} is not a bare score", raw
        )
    value = int(m.group(1))
    if not category.lo <= value <= category.hi:
        raise ScoreParseError(
            f"judge reply {value} outside {category.name} scale "
            f"[{category.lo}, {category.hi}]",
            raw,
        )
    return value


class JudgeClient:
    """Thin chat-completions client with disk cache and bounded retries."""

    def __init__(self, cfg: JudgeConfig, transport: httpx.BaseTransport | None = None):
        self.cfg = cfg
        self._client = httpx.Client(transport=transport, timeout=cfg.timeout)
        self.requests_made = 0

    def close(self) -> None:
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- cache ---------------------------------------------------------------

    def _cache_path(self, prompt: str) -> Path | None:
        if not self.cfg.cache_dir:
            return None
        key = hashlib.sha256(
            (self.cfg.model + "\x00" + prompt).encode("utf-8")
        ).hexdigest()
        return Path(self.cfg.cache_dir) / f"{key}.json"

    def _cache_get(self, prompt: str) -> str | None:
        path = self._cache_path(prompt)
        if path is None or not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))["content"]

    def _cache_put(self, prompt: str, content: str) -> None:
        path = self._cache_path(prompt)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(
            json.dumps({"model": self.cfg.model, "content": content}), encoding="utf-8"
        )
        os.replace(tmp, path)

    # -- transport -------------------------------------------------------------

    def _complete(self, prompt: str) -> str:
        cached = self._cache_get(prompt)
        if cached is not None:
            return cached
        headers = {}
        api_key = os.environ.get(self.cfg.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        payload = {
            "model": self.cfg.model,
            "messages": [
                {"role": "system", "content": "You are a careful evaluator of generated text."},
                {"role": "user", "content": prompt},
            ],
            "temperature": self.cfg.temperature,
        }
        last_error: Exception | None = None
        for attempt in range(self.cfg.max_retries + 1):
            if attempt:
                time.sleep(self.cfg.backoff * (2 ** (attempt - 1)))
            try:
                self.requests_made += 1
                resp = self._client.post(self.cfg.endpoint, json=payload, headers=headers)
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if resp.status_code >= 500:
                last_error = JudgeUnavailableError(f"server error {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise JudgeUnavailableError(
                    f"judge endpoint returned {resp.status_code}: {resp.text[:200]}"
                )
            try:
                content = resp.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, ValueError) as exc:
                raise JudgeUnavailableError(f"malformed judge response: {exc}") from None
            self._cache_put(prompt, content)
            return content
        raise JudgeUnavailableError(
            f"judge endpoint unreachable after {self.cfg.max_retries + 1} attempts: {last_error}"
        )

    # -- scoring -----------------------------------------------------------------

    def judge(self, source: str, generated: str, task: str) -> QualityScore:
        """Score one generation across the task's categories."""
        if task not in CATEGORIES:
            raise ConfigError(f"no judge categories for task {task!r}")
        if not source.strip() or not generated.strip():
            raise ConfigError("judge requires non-empty source and generated texts")
        scores: dict[str, int] = {}
        for category in CATEGORIES[task]:
            prompt = category_prompt(category, task, source, generated)
            content = self._complete(prompt)
            scores[category.name] = parse_score(content, category)
        average = sum(scores.values()) / len(scores)
        return QualityScore(task=task, scores=scores, average=average)


def judge(
    source: str,
    generated: str,
    task: str,
    cfg: JudgeConfig,
    *,
    transport: httpx.BaseTransport | None = None,
) -> QualityScore:
    with JudgeClient(cfg, transport=transport) as client:
        return client.judge(source, generated, task)
