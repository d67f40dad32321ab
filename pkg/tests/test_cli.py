from __future__ import annotations

import hashlib
import json
from pathlib import Path

import pytest

from hansel.cli import main
from tests.conftest import SAMPLE_HIGHLIGHT
from tests.test_augment import GOLDEN_RESIDUAL_0


def write_corpus(path: Path, rows: list[dict]) -> None:
    path.write_text(
        "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows), encoding="utf-8"
    )


def sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture
def highlight_corpus(tmp_path) -> Path:
    path = tmp_path / "corpus.jsonl"
    write_corpus(
        path,
        [{"id": "cnn-001", "source": "(article)", "reference": SAMPLE_HIGHLIGHT,
          "task": "summarization"}],
    )
    return path


@pytest.fixture
def synth_corpus(tmp_path) -> Path:
    path = tmp_path / "synth.jsonl"
    assert main(["make-corpus", "--out", str(path), "--n", "80", "--seed", "4"]) == 0
    return path


class TestAugmentCommand:
    def test_golden_single_record(self, highlight_corpus, tmp_path):
        out = tmp_path / "aug.jsonl"
        code = main([
            "augment", "--input", str(highlight_corpus), "--out", str(out),
            "--framework", "hansel", "--delta", "10", "--residual-max", "0",
            "--seed", "0",
        ])
        assert code == 0
        rec = json.loads(out.read_text(encoding="utf-8"))
        assert rec["output"] == GOLDEN_RESIDUAL_0
        assert rec["framework"] == "hansel"
        manifest = json.loads((tmp_path / "aug.jsonl.manifest.json").read_text())
        assert manifest["counts"]["hansel"] == 1

    def test_zero_residual_cap_in_manifest(self, synth_corpus, tmp_path):
        out = tmp_path / "aug.jsonl"
        main([
            "augment", "--input", str(synth_corpus), "--out", str(out),
            "--framework", "hansel", "--residual-max", "0", "--seed", "1",
        ])
        manifest = json.loads((tmp_path / "aug.jsonl.manifest.json").read_text())
        assert all(a["residual"] == 0 for a in manifest["assignments"])

    def test_gretel_output_has_no_tokens(self, synth_corpus, tmp_path):
        out = tmp_path / "gretel.jsonl"
        main([
            "augment", "--input", str(synth_corpus), "--out", str(out),
            "--framework", "gretel", "--seed", "1",
        ])
        assert "<|len:" not in out.read_text(encoding="utf-8")

    def test_malformed_line_fails_with_line_number(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"id": "a", "reference": "ok words."}\n{"id": "b"}\n')
        out = tmp_path / "aug.jsonl"
        code = main(["augment", "--input", str(bad), "--out", str(out)])
        assert code == 1
        assert "line 2" in capsys.readouterr().err
        assert not out.exists()  # partial output removed

    def test_determinism_bit_identical(self, synth_corpus, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        argv = ["augment", "--input", str(synth_corpus), "--framework", "hansel",
                "--seed", "9"]
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert sha(a) == sha(b)
        assert sha(Path(str(a) + ".manifest.json")) == sha(Path(str(b) + ".manifest.json"))


class TestValidateCommand:
    def test_golden_augment_validates_clean(self, synth_corpus, tmp_path):
        out = tmp_path / "aug.jsonl"
        main(["augment", "--input", str(synth_corpus), "--out", str(out), "--seed", "2"])
        assert main(["validate", "--input", str(out)]) == 0

    def test_corrupted_token_fails_with_report(self, synth_corpus, tmp_path, capsys):
        out = tmp_path / "aug.jsonl"
        main(["augment", "--input", str(synth_corpus), "--out", str(out), "--seed", "2"])
        lines = out.read_text(encoding="utf-8").splitlines()
        for i, line in enumerate(lines):
            rec = json.loads(line)
            if rec["framework"] == "hansel":
                rec["output"] = rec["output"].replace("<|len:w:0|>", "<|len:w:3|>", 1)
                lines[i] = json.dumps(rec, ensure_ascii=False)
                break
        corrupted = tmp_path / "corrupted.jsonl"
        corrupted.write_text("\n".join(lines) + "\n", encoding="utf-8")
        report_path = tmp_path / "report.json"
        code = main(["validate", "--input", str(corrupted), "--report", str(report_path)])
        assert code == 1
        report = json.loads(report_path.read_text())
        assert report["invalid"] == 1
        assert report["problems"][0]["violations"][0]["position"] >= 0
        assert "offset" in capsys.readouterr().err

    def test_empty_file_warns_and_passes(self, tmp_path, capsys):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        assert main(["validate", "--input", str(empty)]) == 0
        assert json.loads(capsys.readouterr().out.splitlines()[0])["lines"] == 0

    def test_validate_respects_delta_flag(self, highlight_corpus, tmp_path):
        out = tmp_path / "aug.jsonl"
        main(["augment", "--input", str(highlight_corpus), "--out", str(out),
              "--delta", "10", "--seed", "0"])
        assert main(["validate", "--input", str(out), "--delta", "10"]) == 0
        assert main(["validate", "--input", str(out), "--delta", "20"]) == 1


class TestSimulateEvaluate:
    def test_rule_generations_hit_targets(self, synth_corpus, tmp_path, capsys):
        gens = tmp_path / "gens.jsonl"
        code = main([
            "simulate", "--input", str(synth_corpus), "--out", str(gens),
            "--mode", "rule", "--targets", "5,20,50,80,130", "--count", "6",
            "--residual-max", "0", "--seed", "3",
        ])
        assert code == 0
        report = tmp_path / "report.json"
        code = main(["evaluate", "--input", str(gens), "--out", str(report)])
        assert code == 0
        payload = json.loads(report.read_text())
        assert payload["mae"] == 0.0
        assert payload["n_scored"] == 30
        per_target = payload["per_target"]
        assert set(per_target) == {"5", "20", "50", "80", "130"}
        assert all(v == 0.0 for v in per_target.values())

    def test_simulate_deterministic(self, synth_corpus, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        argv = ["simulate", "--input", str(synth_corpus), "--mode", "ngram-protocol",
                "--targets", "5,20", "--count", "5", "--seed", "6"]
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert sha(a) == sha(b)

    def test_evaluate_with_references_adds_rouge(self, synth_corpus, tmp_path):
        gens = tmp_path / "gens.jsonl"
        rows = []
        for i, line in enumerate(Path(synth_corpus).read_text().splitlines()[:5]):
            rec = json.loads(line)
            rows.append({"id": rec["id"], "generated": rec["reference"],
                         "target_length": len(rec["reference"].split())})
        write_corpus(gens, rows)
        report = tmp_path / "r.json"
        assert main(["evaluate", "--input", str(gens), "--references", str(synth_corpus),
                     "--out", str(report)]) == 0
        payload = json.loads(report.read_text())
        assert payload["rouge1"] == 1.0 and payload["rougeL"] == 1.0


class TestSweepCommand:
    def test_grid_emits_twelve_cells(self, synth_corpus, tmp_path):
        csv_path = tmp_path / "grid.csv"
        code = main([
            "sweep", "--input", str(synth_corpus), "--delta", "10,20,40",
            "--residual-max", "0,1,3,5", "--csv", str(csv_path), "--seed", "5",
        ])
        assert code == 0
        rows = csv_path.read_text().strip().splitlines()
        assert rows[0] == "delta,residual_max,mae"
        assert len(rows) == 1 + 12

    def test_targets_mode_emits_rows_and_dat(self, synth_corpus, tmp_path):
        csv_path, dat_path = tmp_path / "rows.csv", tmp_path / "rows.dat"
        code = main([
            "sweep", "--input", str(synth_corpus), "--targets", "5,20",
            "--generator", "rule", "--count", "4", "--csv", str(csv_path),
            "--dat", str(dat_path), "--seed", "5", "--residual-max", "0",
        ])
        assert code == 0
        assert len(csv_path.read_text().strip().splitlines()) == 3
        assert dat_path.read_text().startswith("# target mae")

    def test_ngram_generators_train_on_the_fly(self, synth_corpus, tmp_path):
        csv_path = tmp_path / "rows.csv"
        code = main([
            "sweep", "--input", str(synth_corpus), "--targets", "5,20",
            "--generator", "ngram-gretel", "--count", "4", "--seed", "3",
            "--generation-cap", "120", "--csv", str(csv_path),
        ])
        assert code == 0
        rows = csv_path.read_text().strip().splitlines()
        assert len(rows) == 3

    def test_targets_with_grid_is_usage_error(self, synth_corpus, tmp_path):
        code = main([
            "sweep", "--input", str(synth_corpus), "--targets", "5",
            "--delta", "10,20", "--seed", "5",
        ])
        assert code == 2


class TestStatsCommand:
    def test_fixture_count_matches_line_count(self, dialog_fixture_path, tmp_path, capsys):
        out = tmp_path / "stats.json"
        assert main(["stats", "--input", str(dialog_fixture_path), "--out", str(out)]) == 0
        payload = json.loads(capsys.readouterr().out.splitlines()[0])
        n_lines = len(dialog_fixture_path.read_text().splitlines())
        assert payload["count"] == n_lines == 6205

    def test_stats_unit_flag(self, synth_corpus, capsys):
        assert main(["stats", "--input", str(synth_corpus), "--unit", "sentence"]) == 0
        payload = json.loads(capsys.readouterr().out.splitlines()[0])
        assert payload["unit"] == "sentence"


class TestConfigPrecedence:
    def test_flag_beats_file_beats_default(self, highlight_corpus, tmp_path):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"delta": 10, "residual_max": 0, "seed": 3}))

        out_file = tmp_path / "file.jsonl"
        main(["augment", "--input", str(highlight_corpus), "--out", str(out_file),
              "--config", str(cfg_file)])
        rec = json.loads(out_file.read_text())
        assert "<|len:w:2:5|>" in rec["output"]  # delta 10 from file

        out_flag = tmp_path / "flag.jsonl"
        main(["augment", "--input", str(highlight_corpus), "--out", str(out_flag),
              "--config", str(cfg_file), "--delta", "5"])
        rec = json.loads(out_flag.read_text())
        assert rec["output"].startswith("<|len:w:5|>")  # flag wins over file

        out_default = tmp_path / "default.jsonl"
        main(["augment", "--input", str(highlight_corpus), "--out", str(out_default),
              "--seed", "3", "--residual-max", "0"])
        rec = json.loads(out_default.read_text())
        assert rec["output"].startswith("<|len:w:1:5|>")  # built-in delta 20

    def test_template_flag_changes_wire_format(self, highlight_corpus, tmp_path):
        out = tmp_path / "aug.jsonl"
        code = main([
            "augment", "--input", str(highlight_corpus), "--out", str(out),
            "--delta", "10", "--residual-max", "0", "--seed", "0",
            "--template", "[[L:{unit}:{major}:{minor}]]",
            "--compact-template", "[[L:{unit}:{major}]]",
        ])
        assert code == 0
        rec = json.loads(out.read_text())
        assert rec["output"].startswith("[[L:w:2:5]]")
        assert main([
            "validate", "--input", str(out), "--delta", "10", "--residual-max", "0",
            "--template", "[[L:{unit}:{major}:{minor}]]",
            "--compact-template", "[[L:{unit}:{major}]]",
        ]) == 0

    def test_unknown_config_field_is_usage_error(self, highlight_corpus, tmp_path):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"stride": 10}))
        out = tmp_path / "x.jsonl"
        code = main(["augment", "--input", str(highlight_corpus), "--out", str(out),
                     "--config", str(cfg_file)])
        assert code == 2

    def test_missing_input_is_io_error(self, tmp_path):
        code = main(["stats", "--input", str(tmp_path / "nope.jsonl")])
        assert code == 3


class TestJudgeCommand:
    def test_judge_against_local_endpoint(self, tmp_path):
        import threading
        from http.server import BaseHTTPRequestHandler, HTTPServer

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
                prompt = body["messages"][-1]["content"]
                score = "3" if "one metric: fluency" in prompt else "4"
                payload = json.dumps(
                    {"choices": [{"message": {"content": score}}]}
                ).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args):
                pass

        server = HTTPServer(("127.0.0.1", 0), Handler)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            inputs = tmp_path / "to_judge.jsonl"
            write_corpus(
                inputs,
                [
                    {"id": "a", "source": "src text", "generated": "gen one",
                     "task": "summarization"},
                    {"id": "b", "source": "src text", "generated": "gen two",
                     "task": "summarization"},
                ],
            )
            out = tmp_path / "scores.jsonl"
            code = main([
                "judge", "--input", str(inputs), "--out", str(out),
                "--endpoint", f"http://127.0.0.1:{server.server_port}/v1/chat/completions",
                "--model", "local-test", "--cache-dir", str(tmp_path / "cache"),
                "--max-in-flight", "2",
            ])
            assert code == 0
            rows = [json.loads(line) for line in out.read_text().splitlines()]
            assert [r["id"] for r in rows] == ["a", "b"]
            assert rows[0]["scores"] == {
                "coherence": 4, "consistency": 4, "fluency": 3, "relevance": 4,
            }
            assert rows[0]["average"] == pytest.approx(3.75)
        finally:
            server.shutdown()


class TestConsoleScript:
    def test_entry_point_runs(self):
        import subprocess

        proc = subprocess.run(
            ["hansel", "--version"], capture_output=True, text=True, check=False
        )
        assert proc.returncode == 0
