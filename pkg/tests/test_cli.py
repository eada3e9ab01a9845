import json

import pytest

from kextract.dataio import serialize_bio, serialize_relation_csv
from kextract.models import load_artifact
from kextract.service.cli import main, read_predictions

from .synthdata import ner_corpus, relation_corpus


@pytest.fixture(scope="module")
def ner_data(tmp_path_factory):
    data = tmp_path_factory.mktemp("ner_data")
    sentences, _schema, _vocab = ner_corpus(40, seed=6)
    (data / "train.bio").write_text(serialize_bio(sentences), encoding="utf-8")
    return data, sentences


@pytest.fixture(scope="module")
def re_data(tmp_path_factory):
    data = tmp_path_factory.mktemp("re_data")
    records, _schema, _vocab = relation_corpus(60, num_relations=3, vocab_size=60, seed=6)
    (data / "train.csv").write_text(serialize_relation_csv(records), encoding="utf-8")
    return data, records


def run_cli(args):
    return main(args)


def test_run_ner_standard(ner_data, tmp_path, capsys):
    data, _sentences = ner_data
    out = tmp_path / "out"
    code = run_cli(
        [
            "run", "ner", "standard",
            f"data.dir={data}", f"output.dir={out}",
            "train.epochs=6", "train.lr=0.2", "model=rnn",
        ]
    )
    assert code == 0
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    artifact_path = summary["artifact"]
    assert (out / "history.jsonl").read_text().strip()
    artifact = load_artifact(artifact_path)
    assert artifact.schema.task == "ner"
    assert len((out / "history.jsonl").read_text().splitlines()) == 6


def test_model_switch_changes_encoder_kind(re_data, tmp_path, capsys):
    data, _records = re_data
    kinds = {}
    for kind in ("cnn", "rnn"):
        out = tmp_path / kind
        code = run_cli(
            [
                "run", "re", "standard",
                f"data.dir={data}", f"output.dir={out}",
                "train.epochs=2", f"model={kind}",
            ]
        )
        assert code == 0
        summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        kinds[kind] = load_artifact(summary["artifact"]).spec.kind
    assert kinds == {"cnn": "cnn", "rnn": "rnn"}


def test_unknown_scenario_usage_error(ner_data):
    data, _ = ner_data
    with pytest.raises(SystemExit) as exc:
        run_cli(["run", "ner", "interdimensional", f"data.dir={data}"])
    assert exc.value.code != 0


def test_unsupported_combination_rejected(ner_data):
    data, _ = ner_data
    assert run_cli(["run", "ae", "document", f"data.dir={data}"]) == 2


def test_missing_data_dir_names_path(tmp_path, capsys):
    missing = tmp_path / "nowhere"
    code = run_cli(["run", "ner", "standard", f"data.dir={missing}"])
    assert code == 1
    assert str(missing) in capsys.readouterr().err


def test_predict_round_trip_ner(ner_data, tmp_path, capsys):
    data, sentences = ner_data
    out = tmp_path / "out"
    assert (
        run_cli(
            [
                "run", "ner", "standard",
                f"data.dir={data}", f"output.dir={out}",
                "train.epochs=10", "train.lr=0.2", "model=rnn",
            ]
        )
        == 0
    )
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    sentence = " ".join(sentences[0].tokens)
    assert run_cli(["predict", summary["artifact"], sentence]) == 0
    printed = capsys.readouterr().out
    rows = read_predictions(printed)
    assert rows, "expected at least one prediction line"
    assert all({"text", "type", "start", "end"} <= set(r) for r in rows)


def test_predict_re_record(re_data, tmp_path, capsys):
    data, records = re_data
    out = tmp_path / "out"
    assert (
        run_cli(
            [
                "run", "re", "standard",
                f"data.dir={data}", f"output.dir={out}",
                "train.epochs=12", "model=cnn",
            ]
        )
        == 0
    )
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    record = records[0]
    raw = json.dumps(
        {
            "sentence": record.sentence,
            "relation": "",
            "head": record.head,
            "head_offset": record.head_offset,
            "tail": record.tail,
            "tail_offset": record.tail_offset,
        }
    )
    assert run_cli(["predict", summary["artifact"], raw]) == 0
    rows = read_predictions(capsys.readouterr().out)
    assert rows[0]["label"] == record.relation


def test_predict_re_bare_sentence_rejected(re_data, tmp_path, capsys):
    data, records = re_data
    out = tmp_path / "out3"
    assert (
        run_cli(
            [
                "run", "re", "standard",
                f"data.dir={data}", f"output.dir={out}",
                "train.epochs=1", "model=cnn",
            ]
        )
        == 0
    )
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert run_cli(["predict", summary["artifact"], "just a plain sentence"]) == 1
    assert "error" in capsys.readouterr().err


def test_predict_missing_offset_validation_error(re_data, tmp_path, capsys):
    data, records = re_data
    out = tmp_path / "out2"
    assert (
        run_cli(
            [
                "run", "re", "standard",
                f"data.dir={data}", f"output.dir={out}",
                "train.epochs=1", "model=cnn",
            ]
        )
        == 0
    )
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    bad = json.dumps({"sentence": "a b", "relation": "", "head": "a", "head_offset": 0, "tail": "b"})
    assert run_cli(["predict", summary["artifact"], bad]) == 1
    assert "error" in capsys.readouterr().err
