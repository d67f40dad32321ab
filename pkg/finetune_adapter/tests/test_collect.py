from __future__ import annotations

import json

import pytest

from finetune_adapter import RecordError, WireFormat, collect_generations, collect_record


class TestCollectRecord:
    def test_target_from_context_token(self):
        record = {
            "id": "g1",
            "context": "article text\nSummarize. Answer in 23 words. <|len:w:2:3|>",
            "generated": "words go here <|len:w:1|>more words <|len:w:0|>",
        }
        out = collect_record(record, delta=10)
        assert out["target_length"] == 23
        assert out["generated"] == "words go here more words "
        assert "infinite" not in out

    def test_explicit_target_fallback(self):
        out = collect_record({"id": "g2", "generated": "hi", "target_length": 7}, delta=20)
        assert out["target_length"] == 7

    def test_cap_hit_flag_passthrough(self):
        record = {"id": "g3", "generated": "x " * 30, "target_length": 5, "n_tokens": 1722}
        out = collect_record(record, delta=20, max_tokens=1722)
        assert out["infinite"] is True
        below = collect_record({**record, "n_tokens": 1721}, delta=20, max_tokens=1722)
        assert "infinite" not in below

    def test_upstream_infinite_flag_preserved(self):
        out = collect_record(
            {"id": "g4", "generated": "x", "target_length": 5, "infinite": True}, delta=20
        )
        assert out["infinite"] is True

    def test_empty_generation_yields_zero_length_record(self):
        out = collect_record({"id": "g5", "generated": "", "target_length": 9}, delta=20)
        assert out["generated"] == ""

    def test_missing_target_information_is_an_error(self):
        with pytest.raises(RecordError):
            collect_record({"id": "g6", "generated": "text"}, delta=20)

    def test_custom_wire_format(self):
        wire = WireFormat(template="[[{unit}/{major}/{minor}]]", compact_template="[[{unit}/{major}]]")
        record = {"id": "g7", "context": "Reply. [[w/1/2]]", "generated": "a [[w/0]]b"}
        out = collect_record(record, delta=10, wire=wire)
        assert out["target_length"] == 12
        assert out["generated"] == "a b"


class TestCollectFile:
    def test_file_conversion_and_line_errors(self, tmp_path):
        src = tmp_path / "model_out.jsonl"
        src.write_text(
            json.dumps({"id": "a", "generated": "one two <|len:w:0|>", "target_length": 2})
            + "\n"
            + json.dumps({"id": "b", "generated": "zzz"})
            + "\n",
            encoding="utf-8",
        )
        out = tmp_path / "gens.jsonl"
        with pytest.raises(RecordError) as err:
            collect_generations(src, out, delta=20)
        assert "line 2" in str(err.value)

    def test_round_trip_of_rule_follower_style_text(self, tmp_path):
        src = tmp_path / "model_out.jsonl"
        text = "alpha bravo <|len:w:1|>cedar delta echo <|len:w:0|>"
        src.write_text(
            json.dumps({"id": "a", "generated": text, "target_length": 5}) + "\n",
            encoding="utf-8",
        )
        out = tmp_path / "gens.jsonl"
        assert collect_generations(src, out, delta=20) == 1
        rec = json.loads(out.read_text())
        assert rec["generated"] == "alpha bravo cedar delta echo "
        assert "<|len:" not in rec["generated"]
