from __future__ import annotations

import json

import httpx
import pytest

from hansel import (
    ConfigError,
    JudgeClient,
    JudgeConfig,
    JudgeUnavailableError,
    ScoreParseError,
)
from hansel.judge import CATEGORIES, Category, parse_score

ENDPOINT = "https://judge.test/v1/chat/completions"


def make_transport(reply_fn, counter: dict):
    def handler(request: httpx.Request) -> httpx.Response:
        counter["n"] = counter.get("n", 0) + 1
        body = json.loads(request.content.decode("utf-8"))
        content = reply_fn(body["messages"][-1]["content"], counter["n"])
        if isinstance(content, httpx.Response):
            return content
        return httpx.Response(
            200, json={"choices": [{"message": {"content": content}}]}
        )

    return httpx.MockTransport(handler)


def fixed_scores_reply(scores: dict[str, str]):
    def reply(prompt: str, _n: int) -> str:
        for name, value in scores.items():
            if f"one metric: {name}" in prompt:
                return value
        raise AssertionError(f"unrecognized category prompt: {prompt[:80]}")

    return reply


def judge_cfg(**kwargs) -> JudgeConfig:
    defaults = dict(endpoint=ENDPOINT, model="judge-1", max_retries=2, backoff=0.0)
    defaults.update(kwargs)
    return JudgeConfig(**defaults)


class TestScoring:
    def test_summarization_categories_and_average(self):
        counter = {}
        reply = fixed_scores_reply(
            {"coherence": "4", "consistency": "4", "fluency": "3", "relevance": "4"}
        )
        with JudgeClient(judge_cfg(), transport=make_transport(reply, counter)) as client:
            score = client.judge("src text", "gen text", "summarization")
        assert score.scores == {"coherence": 4, "consistency": 4, "fluency": 3, "relevance": 4}
        assert score.average == pytest.approx((4 + 4 + 3 + 4) / 4)
        assert counter["n"] == 4  # one request per category

    def test_dialogue_scales(self):
        counter = {}
        reply = fixed_scores_reply(
            {"naturalness": "5", "coherence": "4", "engagingness": "2", "groundedness": "3"}
        )
        with JudgeClient(judge_cfg(), transport=make_transport(reply, counter)) as client:
            score = client.judge("ctx", "reply", "dialogue")
        assert score.scores["engagingness"] == 2
        assert score.task == "dialogue"

    def test_out_of_scale_reply_is_an_error_not_a_clamp(self):
        counter = {}
        reply = fixed_scores_reply(
            {"coherence": "7", "consistency": "4", "fluency": "3", "relevance": "4"}
        )
        with JudgeClient(judge_cfg(), transport=make_transport(reply, counter)) as client:
            with pytest.raises(ScoreParseError) as err:
                client.judge("s", "g", "summarization")
        assert err.value.raw == "7"

    def test_prose_reply_is_a_parse_error(self):
        counter = {}
        reply = lambda prompt, n: "I would rate this a 4 out of 5."
        with JudgeClient(judge_cfg(), transport=make_transport(reply, counter)) as client:
            with pytest.raises(ScoreParseError):
                client.judge("s", "g", "summarization")

    def test_empty_inputs_rejected(self):
        with JudgeClient(judge_cfg(), transport=httpx.MockTransport(lambda r: httpx.Response(200))) as client:
            with pytest.raises(ConfigError):
                client.judge("", "gen", "summarization")

    def test_unknown_task_rejected(self):
        with JudgeClient(judge_cfg(), transport=httpx.MockTransport(lambda r: httpx.Response(200))) as client:
            with pytest.raises(ConfigError):
                client.judge("s", "g", "poetry")


class TestParseScore:
    CAT = Category("fluency", 1, 3, "desc")

    def test_accepts_bare_integer_with_whitespace(self):
        assert parse_score(" 2 \n", self.CAT) == 2

    def test_accepts_form_echo(self):
        assert parse_score("fluency (1-3): 3", self.CAT) == 3

    def test_rejects_two_numbers(self):
        with pytest.raises(ScoreParseError):
            parse_score("2 or maybe 3", self.CAT)

    def test_rejects_out_of_scale(self):
        with pytest.raises(ScoreParseError):
            parse_score("0", self.CAT)


class TestCache:
    def test_warm_cache_issues_no_requests(self, tmp_path):
        counter = {}
        reply = fixed_scores_reply(
            {"coherence": "4", "consistency": "4", "fluency": "3", "relevance": "4"}
        )
        cfg = judge_cfg(cache_dir=str(tmp_path))
        with JudgeClient(cfg, transport=make_transport(reply, counter)) as client:
            first = client.judge("src", "gen", "summarization")
        assert counter["n"] == 4
        with JudgeClient(cfg, transport=make_transport(reply, counter)) as client:
            second = client.judge("src", "gen", "summarization")
        assert counter["n"] == 4  # untouched
        assert second == first

    def test_cache_keyed_by_model(self, tmp_path):
        counter = {}
        reply = fixed_scores_reply(
            {"coherence": "4", "consistency": "4", "fluency": "3", "relevance": "4"}
        )
        with JudgeClient(judge_cfg(cache_dir=str(tmp_path)), transport=make_transport(reply, counter)) as client:
            client.judge("src", "gen", "summarization")
        with JudgeClient(
            judge_cfg(model="judge-2", cache_dir=str(tmp_path)),
            transport=make_transport(reply, counter),
        ) as client:
            client.judge("src", "gen", "summarization")
        assert counter["n"] == 8


class TestTransportFailures:
    def test_retries_then_succeeds(self):
        counter = {}

        def reply(prompt, n):
            if n <= 2:
                return httpx.Response(503, text="busy")
            return "4" if "coherence" in prompt else "3"

        cfg = judge_cfg(max_retries=3)
        with JudgeClient(cfg, transport=make_transport(reply, counter)) as client:
            score = client.judge("s", "g", "summarization")
        assert score.scores["coherence"] == 4

    def test_exhausted_retries_raise_unavailable(self):
        counter = {}
        reply = lambda prompt, n: httpx.Response(503, text="busy")
        with JudgeClient(judge_cfg(), transport=make_transport(reply, counter)) as client:
            with pytest.raises(JudgeUnavailableError):
                client.judge("s", "g", "summarization")
        assert counter["n"] == 3  # initial try + 2 retries

    def test_client_error_fails_fast(self):
        counter = {}
        reply = lambda prompt, n: httpx.Response(401, text="no key")
        with JudgeClient(judge_cfg(), transport=make_transport(reply, counter)) as client:
            with pytest.raises(JudgeUnavailableError):
                client.judge("s", "g", "summarization")
        assert counter["n"] == 1

    def test_network_exception_retries(self):
        counter = {"n": 0}

        def handler(request: httpx.Request) -> httpx.Response:
            counter["n"] += 1
            if counter["n"] == 1:
                raise httpx.ConnectError("refused")
            return httpx.Response(
                200, json={"choices": [{"message": {"content": "3"}}]}
            )

        cfg = judge_cfg()
        with JudgeClient(cfg, transport=httpx.MockTransport(handler)) as client:
            score = client.judge("s", "g", "dialogue")
        assert set(score.scores) == {c.name for c in CATEGORIES["dialogue"]}
