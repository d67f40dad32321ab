"""Quality scoring through the judge client, offline.

The client speaks to any chat-completions endpoint; here a mock transport
stands in so the demo runs without network access or keys.  Each category is
one request; scores are cached on disk keyed by (model, prompt), so repeated
judging is free.
"""

import json
import tempfile

import httpx

from hansel import JudgeClient, JudgeConfig

CANNED = {"coherence": "4", "consistency": "4", "fluency": "3", "relevance": "4"}


def handler(request: httpx.Request) -> httpx.Response:
    prompt = json.loads(request.content)["messages"][-1]["content"]
    for name, score in CANNED.items():
        if f"one metric: {name}" in prompt:
            return httpx.Response(200, json={"choices": [{"message": {"content": score}}]})
    return httpx.Response(400, text="unknown category")


with tempfile.TemporaryDirectory() as cache_dir:
    cfg = JudgeConfig(
        endpoint="https://judge.local/v1/chat/completions",
        model="demo-judge",
        cache_dir=cache_dir,
        backoff=0.0,
    )
    with JudgeClient(cfg, transport=httpx.MockTransport(handler)) as client:
        score = client.judge(
            source="A gadget turns urine into electricity using microbial fuel cells.",
            generated="Scientists have invented a generator.",
            task="summarization",
        )
        first_requests = client.requests_made
        again = client.judge(
            source="A gadget turns urine into electricity using microbial fuel cells.",
            generated="Scientists have invented a generator.",
            task="summarization",
        )
        assert again == score and client.requests_made == first_requests

print("per-category scores:", score.scores)
print("average:", score.average)
print(f"requests for four categories: {first_requests}; repeat judging hit the cache.")
print("\nagainst a real endpoint: hansel judge --input gens.jsonl --out scores.jsonl \\")
print("  --endpoint https://api.example.com/v1/chat/completions --model gpt-4")
