import json

import numpy as np
import pytest

from mtnorm.cli import main
from mtnorm.neural import load_params

TINY_CONFIG = {
    "model_dim": 16, "heads": 2, "ff_dim": 32, "epochs": 2,
    "batch_size": 32, "seed": 9, "label_count": 11,
}


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    config = root / "config.json"
    config.write_text(json.dumps(TINY_CONFIG), encoding="utf-8")
    corpus = root / "corpus.jsonl"
    golden = root / "golden.jsonl"
    assert main([
        "gen-corpus", "--n", "400", "--seed", "4",
        "--out", str(corpus), "--golden-out", str(golden),
    ]) == 0
    model = root / "model.npz"
    assert main([
        "train", "--corpus", str(corpus), "--config", str(config), "--out", str(model)
    ]) == 0
    return {"root": root, "config": config, "corpus": corpus, "golden": golden, "model": model}


class TestGenCorpus:
    def test_deterministic(self, workspace):
        again = workspace["root"] / "again.jsonl"
        assert main(["gen-corpus", "--n", "400", "--seed", "4", "--out", str(again)]) == 0
        assert again.read_text("utf-8") == workspace["corpus"].read_text("utf-8")

    def test_custom_distribution(self, workspace, tmp_path):
        dist = tmp_path / "dist.json"
        dist.write_text('{"B_Percent": 1.0}', encoding="utf-8")
        out = tmp_path / "corpus.jsonl"
        assert main(["gen-corpus", "--dist", str(dist), "--n", "10", "--seed", "1",
                     "--out", str(out)]) == 0
        for line in out.read_text("utf-8").splitlines():
            assert json.loads(line)["spans"][0][2] == "B_Percent"

    def test_bad_distribution_fails_cleanly(self, tmp_path, capsys):
        dist = tmp_path / "dist.json"
        dist.write_text('{"B_Percent": 0.2}', encoding="utf-8")
        code = main(["gen-corpus", "--dist", str(dist), "--n", "5", "--seed", "1",
                     "--out", str(tmp_path / "x.jsonl")])
        assert code == 1
        assert "mtnorm gen-corpus:" in capsys.readouterr().err


class TestTrain:
    def test_same_seed_identical_checkpoints(self, workspace):
        other = workspace["root"] / "model2.npz"
        assert main([
            "train", "--corpus", str(workspace["corpus"]),
            "--config", str(workspace["config"]), "--out", str(other)
        ]) == 0
        a, _, _ = load_params(str(workspace["model"]))
        b, _, _ = load_params(str(other))
        for name, tensor in a.tensors().items():
            assert np.array_equal(b.tensors()[name], tensor)

    def test_missing_corpus_fails(self, workspace, capsys):
        assert main(["train", "--corpus", "/nonexistent.jsonl",
                     "--out", str(workspace["root"] / "x.npz")]) == 1
        assert "mtnorm train:" in capsys.readouterr().err


class TestNormalize:
    def test_rules_only_fixture(self, capsys):
        assert main(["normalize", "--rules-only", "--text", "今天是2019-10-01"]) == 0
        assert capsys.readouterr().out.strip() == "今天是二零一九年十月一日"

    def test_no_nsw_identity(self, workspace, capsys):
        assert main(["normalize", "--model", str(workspace["model"]),
                     "--text", "大家好才是真的好"]) == 0
        assert capsys.readouterr().out.strip() == "大家好才是真的好"

    def test_file_io_and_trace(self, workspace):
        infile = workspace["root"] / "in.txt"
        outfile = workspace["root"] / "out.txt"
        trace = workspace["root"] / "trace.jsonl"
        infile.write_text("只有10%的学生参加了投票\n遇到紧急情况请拨打911求助\n", encoding="utf-8")
        assert main(["normalize", "--model", str(workspace["model"]),
                     "--in", str(infile), "--out", str(outfile), "--trace", str(trace)]) == 0
        lines = outfile.read_text("utf-8").splitlines()
        assert lines[0] == "只有百分之十的学生参加了投票"
        assert lines[1] == "遇到紧急情况请拨打九幺幺求助"
        records = [json.loads(l) for l in trace.read_text("utf-8").splitlines()]
        assert records[1]["route"] == "priority_rule"
        assert records[1]["sfw"] == "九幺幺"

    def test_model_required_without_rules_only(self, capsys):
        assert main(["normalize", "--text", "共100人"]) == 2
        assert "--model" in capsys.readouterr().err


class TestClassify:
    def test_labels_and_probabilities_printed(self, workspace, capsys):
        assert main(["classify", "--model", str(workspace["model"]),
                     "--text", "只有10%的学生参加了投票"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("10%\t")
        assert "B_Percent" in out

    def test_no_legal_label_reported(self, workspace, capsys):
        assert main(["classify", "--model", str(workspace["model"]),
                     "--text", "温度是25.3左右"]) == 0
        assert "<no legal label>" in capsys.readouterr().out


class TestEvaluate:
    def test_report_prints_both_systems(self, workspace, capsys):
        assert main(["evaluate", "--golden", str(workspace["golden"]),
                     "--model", str(workspace["model"])]) == 0
        out = capsys.readouterr().out
        assert "rule-based baseline" in out
        assert "hybrid system" in out

    def test_machine_readable_records(self, workspace):
        report = workspace["root"] / "report.jsonl"
        assert main(["evaluate", "--golden", str(workspace["golden"]),
                     "--model", str(workspace["model"]), "--report", str(report)]) == 0
        records = [json.loads(l) for l in report.read_text("utf-8").splitlines()]
        systems = [r for r in records if r["record"] == "system"]
        assert {r["name"] for r in systems} == {"rules", "hybrid"}
        assert any(r["record"] == "label" for r in records)


class TestAblate:
    def test_grid_rows_printed(self, workspace, capsys):
        grid = workspace["root"] / "grid.json"
        grid.write_text(json.dumps([{"name": "proposed"}, {"name": "ce", "alpha": 1.0,
                                                           "gamma": 0.0}]), encoding="utf-8")
        assert main(["ablate", "--grid", str(grid), "--corpus", str(workspace["corpus"]),
                     "--config", str(workspace["config"]), "--seed", "3"]) == 0
        out = capsys.readouterr().out
        assert "proposed" in out and "ce" in out

    def test_bad_grid_fails_cleanly(self, workspace, capsys):
        grid = workspace["root"] / "badgrid.json"
        grid.write_text('{"not": "a list"}', encoding="utf-8")
        assert main(["ablate", "--grid", str(grid), "--corpus", str(workspace["corpus"]),
                     "--seed", "3"]) == 1
        assert "mtnorm ablate:" in capsys.readouterr().err
