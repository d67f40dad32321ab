"""Thin sketch: feeding a materialized training file into a torch loop.

The adapter's contract is file-level; this script shows the whole shape of
the consumption side - batching, padding, ignore-index loss - with a toy
model so it runs anywhere.  Swap in a real causal LM and the registered
tokenizer's vocabulary size for actual finetuning; initialize the new token
embeddings to the mean of the existing rows, as recorded by `register`.

Usage: python train_sketch.py masked_train.jsonl
"""

from __future__ import annotations

import json
import sys

import torch
import torch.nn.functional as F

IGNORE_INDEX = -100
PAD_ID = 0


def load_batches(path: str, batch_size: int = 8):
    rows = [json.loads(line) for line in open(path, encoding="utf-8")]
    for i in range(0, len(rows), batch_size):
        chunk = rows[i : i + batch_size]
        width = max(len(r["input_ids"]) for r in chunk)
        ids = torch.full((len(chunk), width), PAD_ID, dtype=torch.long)
        labels = torch.full((len(chunk), width), IGNORE_INDEX, dtype=torch.long)
        for j, row in enumerate(chunk):
            n = len(row["input_ids"])
            ids[j, :n] = torch.tensor(row["input_ids"])
            labels[j, :n] = torch.tensor(row["labels"])
        yield ids, labels


def main(path: str) -> None:
    vocab_size = 1 + max(
        max(r) for r in (json.loads(line)["input_ids"] for line in open(path, encoding="utf-8"))
    )
    embed = torch.nn.Embedding(vocab_size, 32)
    head = torch.nn.Linear(32, vocab_size)
    opt = torch.optim.AdamW(list(embed.parameters()) + list(head.parameters()), lr=1e-3)

    for ids, labels in load_batches(path):
        logits = head(embed(ids[:, :-1]))
        loss = F.cross_entropy(
            logits.reshape(-1, vocab_size),
            labels[:, 1:].reshape(-1),
            ignore_index=IGNORE_INDEX,
        )
        opt.zero_grad()
        loss.backward()
        opt.step()
        n_masked = int((labels == IGNORE_INDEX).sum())
        print(f"batch loss {loss.item():.3f}  masked positions {n_masked}")


if __name__ == "__main__":
    main(sys.argv[1])
