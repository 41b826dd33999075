import json

import pytest

from urcminer.cli import run
from urcminer.manifest import manifest_path

import synth


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    dump = synth.make_dump(root / "dump", n_questions=120, seed=3)
    files = synth.run_pipeline(root / "run", dump)
    return root / "run", files, dump


def test_every_stage_writes_outputs(pipeline):
    work, files, _ = pipeline
    for name in ("corpus.jsonl", "sample.jsonl", "features.csv", "labels.csv", "tfidf.csv", "vocab.json",
                 "model.json", "report.json", "predictions.jsonl", "stats.json", "cv.json",
                 "figs/confusion.png", "figs/roc.png", "figs/importance.png",
                 "figs/latency.png", "figs/roles.png", "figs/score_quantiles.png"):
        assert name in files
        assert (work / name).stat().st_size > 0
    for png in (f for f in files if f.endswith(".png")):
        assert (work / png).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert "model.json.manifest.json" in files


def test_outputs_content(pipeline):
    work, _, _ = pipeline
    model = json.loads((work / "model.json").read_text())
    assert model["kind"] == "rforest" and model["classes"] == ["NO_URC", "URC"]
    assert len(model["feature_names"]) == 23
    report = json.loads((work / "report.json").read_text())
    assert set(report["per_class"]) == {"NO_URC", "URC"}
    stats = json.loads((work / "stats.json").read_text())
    assert set(stats) == {"prevalence", "latency", "role_matrix", "score_quantiles"}
    first = json.loads((work / "predictions.jsonl").read_text().splitlines()[0])
    assert abs(sum(first["class_probabilities"].values()) - 1) < 1e-9


def test_train_prints_validation_accuracy(pipeline, capsys, monkeypatch):
    work, _, _ = pipeline
    monkeypatch.chdir(work)
    rc = run(["train", "--model", "lr", "--features", "features.csv", "--labels", "labels.csv",
              "--out", "lr.json", "--table"])
    assert rc == 0
    assert "validation accuracy" in capsys.readouterr().out


def test_eval_table_layout(pipeline, capsys, monkeypatch):
    monkeypatch.chdir(pipeline[0])
    assert run(["eval", "--model", "model.json", "--features", "features.csv", "--labels", "labels.csv",
                "--table"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("Acc:") and "Category" in out and "URC" in out


def test_stats_table(pipeline, capsys, monkeypatch):
    monkeypatch.chdir(pipeline[0])
    assert run(["stats", "--annotations", "annotations.csv", "--corpus", "sample.jsonl", "--table"]) == 0
    assert "URC prevalence" in capsys.readouterr().out


def test_three_class_training(pipeline, monkeypatch, capsys):
    monkeypatch.chdir(pipeline[0])
    assert run(["train", "--model", "gnb", "--corpus", "sample.jsonl", "--annotations", "annotations.csv",
                "--classes", "3", "--out", "gnb3.json"]) == 0
    assert json.loads(capsys.readouterr().out)["classes"] == ["NO_URC", "URC_ADDRESSED", "URC_UNADDRESSED"]


def test_usage_error_exit_2(capsys):
    assert run([]) == 2
    assert run(["train"]) == 2
    assert run(["stats", "--bogus"]) == 2


def test_data_error_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.xml"
    bad.write_text("<posts><row")
    rc = run(["ingest", "--posts", str(bad), "--comments", str(bad), "--users", str(bad), "--history", str(bad),
              "--out", str(tmp_path / "c.jsonl")])
    assert rc == 1
    assert "error" in capsys.readouterr().err
    assert not (tmp_path / "c.jsonl").exists()


def test_schema_error_exit_1(pipeline, monkeypatch, capsys):
    monkeypatch.chdir(pipeline[0])
    assert run(["predict", "--model", "model.json", "--features", "tfidf.csv"]) == 1
    assert "column 0" in capsys.readouterr().err


def test_verify_detects_tampering(pipeline, tmp_path, monkeypatch, capsys):
    work, _, _ = pipeline
    monkeypatch.chdir(work)
    assert run(["verify", "--manifest", "model.json.manifest.json"]) == 0
    rec = json.loads((work / "model.json.manifest.json").read_text())
    rec["inputs"]["labels"]["sha256"] = "0" * 64
    tampered = tmp_path / "t.json"
    tampered.write_text(json.dumps(rec))
    capsys.readouterr()
    assert run(["verify", "--manifest", str(tampered)]) == 1
    assert "mismatch" in capsys.readouterr().out


def test_seed_changes_digest(pipeline, monkeypatch):
    work, _, _ = pipeline
    monkeypatch.chdir(work)
    digests = []
    for seed in (1, 2):
        assert run(["sample", "--corpus", "corpus.jsonl", "--n", "20", "--seed", str(seed), "--out", "s.jsonl"]) == 0
        digests.append(json.loads(manifest_path("s.jsonl").read_text())["digest"])
    assert digests[0] != digests[1]


def test_rerun_is_byte_identical(pipeline, tmp_path):
    work, files, dump = pipeline
    files2 = synth.run_pipeline(tmp_path / "again", dump)
    assert files2 == files
    for f in files:
        assert (work / f).read_bytes() == (tmp_path / "again" / f).read_bytes(), f


def test_stopword_env_override(pipeline, tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(pipeline[0])
    stop = tmp_path / "stop.txt"
    stop.write_text("\n".join(["the", "you", "is", "it", "this", "for"]) + "\n")
    monkeypatch.setenv("URCMINER_STOPWORDS", str(stop))
    assert run(["vectorize", "--corpus", "sample.jsonl", "--out", str(tmp_path / "t.csv")]) == 0
    with_env = json.loads(capsys.readouterr().out)["terms"]
    monkeypatch.delenv("URCMINER_STOPWORDS")
    assert run(["vectorize", "--corpus", "sample.jsonl", "--out", str(tmp_path / "t2.csv")]) == 0
    assert json.loads(capsys.readouterr().out)["terms"] < with_env
