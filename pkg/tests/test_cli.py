import json

import pytest

from aljp import corpus
from aljp.artifact import load_artifact
from aljp.cli import main


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    code = main(
        [
            "synth",
            "--case-type", "custody",
            "--per-class", "6",
            "--seed", "11",
            "--out", str(root / "cases.jsonl"),
            "--embeddings-out", str(root / "emb.txt"),
            "--embed-dim", "16",
        ]
    )
    assert code == 0
    return root


class TestSynth:
    def test_corpus_loads(self, data_dir):
        caseset = corpus.load_cases(data_dir / "cases.jsonl")
        assert len(caseset) == 24
        assert caseset.case_type == "custody"

    def test_embeddings_written(self, data_dir):
        header = (data_dir / "emb.txt").read_text(encoding="utf-8").splitlines()[0]
        assert header.split()[1] == "16"

    def test_deterministic(self, tmp_path, data_dir):
        out = tmp_path / "again.jsonl"
        main(["synth", "--case-type", "custody", "--per-class", "6", "--seed", "11",
              "--out", str(out)])
        assert out.read_bytes() == (data_dir / "cases.jsonl").read_bytes()


class TestPreprocess:
    def test_writes_token_records(self, data_dir, tmp_path):
        out = tmp_path / "tokens.jsonl"
        code = main(["preprocess", "--data", str(data_dir / "cases.jsonl"), "--out", str(out)])
        assert code == 0
        lines = out.read_text(encoding="utf-8").strip().splitlines()
        assert len(lines) == 24
        record = json.loads(lines[0])
        assert {"id", "claim_tokens", "answer_tokens", "pleading_tokens"} <= set(record)
        assert record["pleading_tokens"]


class TestTrainPredict:
    def test_train_then_predict(self, data_dir, tmp_path, capsys):
        model_path = tmp_path / "model.aljp"
        code = main([
            "train",
            "--data", str(data_dir / "cases.jsonl"),
            "--task", "judgment",
            "--family", "logreg",
            "--representation", "tfidf",
            "--seed", "4",
            "--out", str(model_path),
        ])
        assert code == 0
        artifact = load_artifact(model_path)
        assert artifact.family == "logreg"
        capsys.readouterr()
        code = main([
            "predict",
            "--model", str(model_path),
            "--pleading", "حضر الطرفان وطلب وكيل المدعية التخيير",
        ])
        assert code == 0
        response = json.loads(capsys.readouterr().out)
        assert len(response["probabilities"]) == 4

    def test_train_word2vec(self, data_dir, tmp_path):
        model_path = tmp_path / "w2v.aljp"
        code = main([
            "train",
            "--data", str(data_dir / "cases.jsonl"),
            "--family", "logreg",
            "--representation", "word2vec",
            "--embeddings", str(data_dir / "emb.txt"),
            "--out", str(model_path),
        ])
        assert code == 0
        assert load_artifact(model_path).featurizer.kind == "w2v_mean"

    def test_train_lstm(self, data_dir, tmp_path):
        model_path = tmp_path / "lstm.aljp"
        config = tmp_path / "overrides.json"
        config.write_text(json.dumps({"epochs": 2, "maxlen": 24, "embed_dim": 8,
                                      "lstm_units": 8, "dense_units": 8}))
        code = main([
            "train",
            "--data", str(data_dir / "cases.jsonl"),
            "--family", "lstm",
            "--config", str(config),
            "--out", str(model_path),
        ])
        assert code == 0
        assert load_artifact(model_path).family == "lstm"


class TestGrid:
    def test_grid_writes_scores(self, data_dir, tmp_path, capsys):
        out = tmp_path / "grid.json"
        code = main([
            "grid",
            "--data", str(data_dir / "cases.jsonl"),
            "--seed", "2",
            "--out", str(out),
        ])
        assert code == 0
        assert "best:" in capsys.readouterr().out
        doc = json.loads(out.read_text())
        assert doc["scores"]
        assert doc["best_score"] >= max(0.0, doc["scores"][0]["score"] - 1.0)


class TestEval:
    def test_eval_report(self, data_dir, tmp_path, capsys):
        out = tmp_path / "report.json"
        config = tmp_path / "exp.json"
        config.write_text(json.dumps({"neural_epochs": 2, "svm_grid": [
            {"kind": "linear", "c": 10.0}]}))
        code = main([
            "eval",
            "--data", str(data_dir / "cases.jsonl"),
            "--rows", "SVM-TFIDF,LR-TFIDF",
            "--seed", "3",
            "--config", str(config),
            "--out", str(out),
        ])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "SVM-TFIDF" in stdout and "Acc(%)" in stdout
        doc = json.loads(out.read_text(encoding="utf-8"))
        assert [row["name"] for row in doc["rows"]] == ["SVM-TFIDF", "LR-TFIDF"]

    def test_eval_unknown_row_is_data_error(self, data_dir):
        code = main([
            "eval", "--data", str(data_dir / "cases.jsonl"), "--rows", "TREE-TFIDF",
        ])
        assert code == 2


class TestExitCodes:
    def test_usage_error_is_one(self, capsys):
        assert main(["train"]) == 1  # missing required args
        assert main(["no-such-command"]) == 1
        capsys.readouterr()

    def test_data_error_is_two(self, tmp_path, capsys):
        code = main([
            "train",
            "--data", str(tmp_path / "missing.jsonl"),
            "--family", "logreg",
            "--out", str(tmp_path / "m.aljp"),
        ])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_version_flag(self, capsys):
        assert main(["--version"]) == 0
        assert "aljp" in capsys.readouterr().out
