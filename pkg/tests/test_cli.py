import json

import pytest

from titleforge.cli import cli_dispatch


class TestDispatch:
    def test_unknown_subcommand_exits_2(self, capsys):
        with pytest.raises(SystemExit) as err:
            cli_dispatch(["frobnicate"])
        assert err.value.code == 2

    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as err:
            cli_dispatch(["build-corpus", "--nope"])
        assert err.value.code == 2

    def test_help_exits_0(self, capsys):
        with pytest.raises(SystemExit) as err:
            cli_dispatch(["--help"])
        assert err.value.code == 0
        assert "build-corpus" in capsys.readouterr().out


class TestBuildCorpus:
    def test_builds_fixture_corpus(self, dump_path, tmp_path, capsys):
        code = cli_dispatch([
            "build-corpus", "--dump", str(dump_path), "--langs", "python,java",
            "--out", str(tmp_path),
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "python: train=8 valid=1 test=1" in out
        assert (tmp_path / "python.train.jsonl").exists()
        assert (tmp_path / "java.test.jsonl").exists()

    def test_min_score_flag(self, dump_path, tmp_path):
        code = cli_dispatch([
            "build-corpus", "--dump", str(dump_path), "--langs", "python",
            "--out", str(tmp_path), "--min-score", "15",
        ])
        assert code == 0
        lines = sum(
            len((tmp_path / f"python.{part}.jsonl").read_text().splitlines())
            for part in ("train", "valid", "test")
        )
        assert lines == 6  # posts 105, 106, 111, 113, 116, 118 clear the raised threshold

    def test_min_score_leaving_too_few_records_fails_cleanly(self, dump_path, tmp_path, capsys):
        code = cli_dispatch([
            "build-corpus", "--dump", str(dump_path), "--langs", "python",
            "--out", str(tmp_path), "--min-score", "30",
        ])
        assert code == 1
        assert "no language produced enough records" in capsys.readouterr().err

    def test_missing_dump_errors(self, tmp_path, capsys):
        code = cli_dispatch([
            "build-corpus", "--dump", str(tmp_path / "nope.xml"), "--langs", "python",
            "--out", str(tmp_path),
        ])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestTrainEvaluateGenerate:
    @pytest.fixture(scope="class")
    def corpus_dir(self, tmp_path_factory):
        from titleforge.corpus import split_corpus, write_split
        from titleforge.testing import synthetic_quadruplets

        out = tmp_path_factory.mktemp("cli_corpus")
        quads = synthetic_quadruplets(40, langs=("python", "java"), seed=1)
        for lang in ("python", "java"):
            write_split(split_corpus([q for q in quads if q.lang == lang]), out)
        return out

    @pytest.fixture(scope="class")
    def trained_dir(self, corpus_dir, tiny_model_dir, tmp_path_factory):
        out = tmp_path_factory.mktemp("cli_train")
        code = cli_dispatch([
            "train", "--corpus", str(corpus_dir), "--mode", "hybrid",
            "--modality", "bimodal", "--langs", "python,java",
            "--out", str(out), "--checkpoint", str(tiny_model_dir),
            "--max-epochs", "1", "--batch-size", "8", "--lr", "3e-4",
            "--max-src", "64", "--max-tgt", "16",
        ])
        assert code == 0
        return out

    def test_train_writes_history_and_best(self, trained_dir):
        assert (trained_dir / "history.jsonl").exists()
        assert (trained_dir / "best" / "manifest.json").exists()

    def test_evaluate_writes_report(self, trained_dir, corpus_dir, tmp_path, capsys):
        report_path = tmp_path / "report.json"
        dump_path = tmp_path / "dump.jsonl"
        code = cli_dispatch([
            "evaluate", "--model", str(trained_dir / "best"), "--corpus", str(corpus_dir),
            "--out", str(report_path), "--langs", "python,java", "--beam", "4",
            "--dump", str(dump_path),
        ])
        assert code == 0
        report = json.loads(report_path.read_text())
        assert set(report["per_language"]) == {"python", "java"}
        for scores in report["per_language"].values():
            assert set(scores) >= {"rouge_l", "meteor", "bleu_1", "bleu_4", "cider"}
        assert "metrics_params" in report
        dumped = [json.loads(l) for l in dump_path.read_text().splitlines()]
        assert {"post_id", "generated", "reference"} <= set(dumped[0])

    def test_generate_prints_scored_titles(self, trained_dir, tmp_path, capsys):
        desc = tmp_path / "desc.txt"
        code_file = tmp_path / "code.txt"
        desc.write_text("my lazy buffers will not parse")
        code_file.write_text("buffers = parse ( lazy )")
        code = cli_dispatch([
            "generate", "--model", str(trained_dir / "best"), "--lang", "python",
            "--desc-file", str(desc), "--code-file", str(code_file), "--k", "2", "--beam", "4",
        ])
        assert code == 0
        lines = [l for l in capsys.readouterr().out.splitlines() if l.strip()]
        assert 1 <= len(lines) <= 2
        for line in lines:
            score, title = line.split("\t", 1)
            float(score)
            assert title.strip()

    def test_generate_unknown_lang_errors(self, trained_dir, tmp_path, capsys):
        desc = tmp_path / "d.txt"
        desc.write_text("words here")
        code = cli_dispatch([
            "generate", "--model", str(trained_dir / "best"), "--lang", "cobol",
            "--desc-file", str(desc),
        ])
        assert code == 1
        assert "no registered prefix" in capsys.readouterr().err


class TestServe:
    def test_serve_requires_model(self, monkeypatch, capsys):
        monkeypatch.delenv("TITLEFORGE_MODEL_DIR", raising=False)
        code = cli_dispatch(["serve", "--port", "8123"])
        assert code == 2
        assert "TITLEFORGE_MODEL_DIR" in capsys.readouterr().err
