from __future__ import annotations

import numpy as np
import pytest

from hansel import (
    HanselConfig,
    LengthUnit,
    ProtocolError,
    build_inference_context,
    count,
    rule_follow,
    strip_tokens,
    validate,
)
from hansel.rule_follower import (
    RESIDUAL_FINISH_SENTENCE,
    RESIDUAL_STOP_AT_ZERO,
    RuleFollowerConfig,
)


def generated_length(text: str, cfg: HanselConfig) -> int:
    return count(strip_tokens(text, cfg.rendering), LengthUnit.WORD)


class TestRuleFollow:
    def test_stop_at_zero_exact_five_words(self):
        cfg = HanselConfig(delta=20, residual_max=3)
        rf = RuleFollowerConfig(residual_behavior=RESIDUAL_STOP_AT_ZERO, seed=1)
        out = rule_follow("Reply. <|len:w:0:5|>", cfg, rf)
        assert generated_length(out, cfg) == 5
        assert out.endswith("<|len:w:0|>")

    def test_markers_at_stride_boundaries(self):
        cfg = HanselConfig(delta=20, residual_max=0)
        out = rule_follow("Reply. <|len:w:2:3|>", cfg)
        assert generated_length(out, cfg) == 43
        full = "<|len:w:2:3|> " + out
        assert validate(full, cfg).ok
        words_before_each = []
        running = []
        for item in out.split():
            if item.startswith("<|len:"):
                words_before_each.append(len(running))
            else:
                running.append(item)
        assert words_before_each == [3, 23, 43]

    def test_finish_sentence_bounded_by_cap(self):
        cfg = HanselConfig(delta=20, residual_max=1)
        rf = RuleFollowerConfig(residual_behavior=RESIDUAL_FINISH_SENTENCE, seed=2)
        rng = np.random.default_rng(2)
        for target in range(1, 40):
            ctx = build_inference_context("s", "dialogue", target, "hansel", cfg)
            out = rule_follow(ctx, cfg, rf, rng=rng)
            assert 0 <= generated_length(out, cfg) - target <= cfg.residual_max

    def test_all_generations_validate(self):
        rng = np.random.default_rng(9)
        for i in range(200):
            delta = int(rng.choice([10, 20, 40]))
            residual_max = int(rng.choice([0, 1, 3, 5]))
            target = int(rng.integers(1, 201))
            cfg = HanselConfig(delta=delta, residual_max=residual_max)
            ctx = build_inference_context("s", "dialogue", target, "hansel", cfg)
            out = rule_follow(ctx, cfg, rng=rng)
            opener = ctx.rsplit(" ", 1)[-1]
            assert validate(opener + " " + out, cfg).ok

    def test_context_without_opening_token_rejected(self):
        cfg = HanselConfig(delta=20, residual_max=0)
        with pytest.raises(ProtocolError):
            rule_follow("Reply in 10 words.", cfg)

    def test_trailing_text_after_token_rejected(self):
        cfg = HanselConfig(delta=20, residual_max=0)
        with pytest.raises(ProtocolError):
            rule_follow("Reply. <|len:w:0:5|> and then", cfg)

    def test_multi_unit_config_rejected(self):
        cfg = HanselConfig(
            unit=(LengthUnit.SENTENCE, LengthUnit.WORD), delta=(5, 20), residual_max=1
        )
        with pytest.raises(ProtocolError):
            rule_follow("Reply. <|len:s:0:2|><|len:w:0:5|>", cfg)
