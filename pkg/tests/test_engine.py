import pytest
import torch

from kextract.core import new_artifact, predict, train, validate
from kextract.core.engine import TrainingDiverged
from kextract.errors import KextractError, ValidationError
from kextract.models import default_spec

from .synthdata import ner_corpus, relation_corpus

CFG = {"epochs": 3, "batch_size": 16, "lr": 0.1, "seed": 1}


@pytest.fixture(scope="module")
def re_data():
    return relation_corpus(80, num_relations=4, vocab_size=80, seed=3)


def re_artifact(schema, vocab, seed=1, **spec_kw):
    spec = default_spec(
        "cnn", hidden_dim=24, kernel_widths=(3,), position_embedding_dim=4,
        embedding_dim=16, **spec_kw,
    )
    return new_artifact(spec, schema, vocab, seed=seed)


def test_epochs_zero_returns_initialized(re_data):
    records, schema, vocab = re_data
    artifact = re_artifact(schema, vocab)
    before = artifact.parameter_checksum()
    out, history = train(artifact, records, {"epochs": 0, "seed": 1})
    assert history == []
    assert out.parameter_checksum() == before


def test_seed_determinism(re_data):
    records, schema, vocab = re_data
    outs = []
    for _ in range(2):
        artifact = re_artifact(schema, vocab)
        out, _ = train(artifact, records, CFG)
        outs.append(out.parameter_checksum())
    assert outs[0] == outs[1]


def test_different_seed_differs(re_data):
    records, schema, vocab = re_data
    a, _ = train(re_artifact(schema, vocab), records, dict(CFG, seed=1))
    b, _ = train(re_artifact(schema, vocab), records, dict(CFG, seed=2))
    assert a.parameter_checksum() != b.parameter_checksum()


def test_loss_decreases_on_separable_data(re_data):
    records, schema, vocab = re_data
    _, history = train(
        re_artifact(schema, vocab), records, {"epochs": 5, "lr": 0.05, "seed": 0}
    )
    losses = [h["loss"] for h in history]
    assert all(b < a for a, b in zip(losses, losses[1:]))


def test_nan_loss_aborts_with_diagnostic(re_data):
    records, schema, vocab = re_data
    with pytest.raises(TrainingDiverged, match="parameter norm"):
        train(re_artifact(schema, vocab), records, {"epochs": 8, "lr": 1e18, "seed": 0})


def test_empty_dataset_rejected(re_data):
    _, schema, vocab = re_data
    with pytest.raises(KextractError):
        train(re_artifact(schema, vocab), [], CFG)
    with pytest.raises(KextractError):
        validate(re_artifact(schema, vocab), [])


def test_validate_perfect_and_pure(re_data):
    records, schema, vocab = re_data
    artifact, _ = train(
        re_artifact(schema, vocab), records, {"epochs": 30, "lr": 0.1, "seed": 0}
    )
    before = artifact.parameter_checksum()
    report = validate(artifact, records)
    assert report.f1 == 1.0
    out = predict(artifact, records[0])
    assert out["label"] == records[0].relation
    assert artifact.parameter_checksum() == before


def test_early_stopping_cuts_history(re_data):
    records, schema, vocab = re_data
    _, history = train(
        re_artifact(schema, vocab),
        records,
        {"epochs": 50, "lr": 0.1, "seed": 0, "patience": 2},
    )
    assert len(history) < 50


def test_ner_end_to_end():
    sentences, schema, vocab = ner_corpus(60, seed=2)
    spec = default_spec("rnn", hidden_dim=32, embedding_dim=16)
    artifact, history = train(
        new_artifact(spec, schema, vocab), sentences, {"epochs": 25, "lr": 0.2, "seed": 0}
    )
    assert history[-1]["f1"] > 0.9
    report = validate(artifact, sentences)
    assert report.f1 > 0.9
    entities = predict(artifact, " ".join(sentences[0].tokens))
    assert all({"text", "type", "start", "end"} <= set(e) for e in entities)


def test_predict_empty_sentence():
    sentences, schema, vocab = ner_corpus(10, seed=1)
    spec = default_spec("cnn", hidden_dim=8, kernel_widths=(3,), embedding_dim=8)
    artifact = new_artifact(spec, schema, vocab)
    assert predict(artifact, "") == []


def test_predict_rejects_wrong_input_type(re_data):
    _, schema, vocab = re_data
    artifact = re_artifact(schema, vocab)
    with pytest.raises(ValidationError):
        predict(artifact, 3.14)


def test_sherlock_sentence_through_toy_artifact():
    # synthetic training data embeds this sentence's entity pattern
    sentence = (
        "It was one o'clock when we left Lauriston Gardens , and Sherlock Holmes "
        "led me meet Gregson from Scotland Yard ."
    )
    import random

    from kextract.dataio import TaggedSentence, build_vocab
    from kextract.models import LabelSchema, bio_tagset

    entities = {
        "PER": [["Sherlock", "Holmes"], ["Gregson"], ["Lestrade"], ["Watson"]],
        "LOC": [["Lauriston", "Gardens"], ["Baker", "Street"], ["Brixton", "Road"]],
        "ORG": [["Scotland", "Yard"], ["The", "Times"]],
    }
    fillers = sentence.replace(",", " ,").split()
    fillers = [w for w in fillers if not any(w in m for ms in entities.values() for m in ms)]
    rng = random.Random(4)
    sentences = []
    for _ in range(80):
        tokens, tags = [], []
        for _ in range(rng.randint(2, 3)):
            tokens.extend(rng.choices(fillers, k=rng.randint(1, 3)))
            tags.extend(["O"] * (len(tokens) - len(tags)))
            etype = rng.choice(list(entities))
            mention = rng.choice(entities[etype])
            tokens.extend(mention)
            tags.extend([f"B-{etype}"] + [f"I-{etype}"] * (len(mention) - 1))
        sentences.append(TaggedSentence(tuple(tokens), tuple(tags)))
    schema = LabelSchema("ner", bio_tagset(("LOC", "ORG", "PER")))
    vocab = build_vocab([list(s.tokens) for s in sentences])
    spec = default_spec("rnn", hidden_dim=32, embedding_dim=16)
    artifact, _ = train(
        new_artifact(spec, schema, vocab, seed=1),
        sentences,
        {"epochs": 30, "lr": 0.2, "seed": 1},
    )
    found = {(e["text"], e["type"]) for e in predict(artifact, sentence)}
    assert {
        ("Lauriston Gardens", "LOC"),
        ("Sherlock Holmes", "PER"),
        ("Gregson", "PER"),
        ("Scotland Yard", "ORG"),
    } <= found


def test_no_nan_inf_after_100_steps(re_data):
    records, schema, vocab = re_data
    # 100 steps: 80 records / batch 16 = 5 batches per epoch, 20 epochs
    artifact, history = train(
        re_artifact(schema, vocab),
        records,
        {"epochs": 20, "batch_size": 16, "lr": 0.1, "seed": 3},
    )
    assert all(torch.isfinite(torch.tensor(h["loss"])) for h in history)
    for arr in artifact.parameters.values():
        assert torch.isfinite(torch.from_numpy(arr)).all()
    from kextract.models.factory import instantiate

    model = instantiate(artifact)
    batch = model.collate(records[:8])
    with torch.no_grad():
        proba = model(batch[0], batch[1], batch[2], batch[3])
    assert torch.isfinite(proba).all()
    assert torch.allclose(proba.sum(dim=-1), torch.ones(8), atol=1e-6)


def test_validation_split_checkpointing(re_data):
    records, schema, vocab = re_data
    train_split, val_split = records[:60], records[60:]
    artifact, history = train(
        re_artifact(schema, vocab),
        train_split,
        {"epochs": 10, "lr": 0.1, "seed": 0},
        val_dataset=val_split,
    )
    assert validate(artifact, val_split).f1 >= max(h["f1"] for h in history) - 1e-9
