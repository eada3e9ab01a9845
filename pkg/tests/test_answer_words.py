import math

import pytest
import torch

from kextract.dataio import build_vocab
from kextract.lowres import (
    init_virtual_answer_words,
    relation_logits,
    score_relations,
    synergy_loss,
)
from kextract.models import LabelSchema, init_parameters
from torch import nn


@pytest.fixture
def setup():
    vocab = build_vocab([["located", "in", "works", "for", "born"]])
    schema = LabelSchema("re", ("located in", "works for", "born"))
    emb = nn.Embedding(len(vocab), 8)
    init_parameters(emb, 3)
    return vocab, schema, emb


def test_single_token_label_is_its_embedding(setup):
    vocab, schema, emb = setup
    bank = init_virtual_answer_words(schema, emb.weight.detach(), vocab)
    row = emb.weight[vocab.id_of("born")]
    assert torch.allclose(bank.answer("born"), row)


def test_multi_token_label_is_mean(setup):
    vocab, schema, emb = setup
    bank = init_virtual_answer_words(schema, emb.weight.detach(), vocab)
    mean = emb.weight[[vocab.id_of("located"), vocab.id_of("in")]].mean(dim=0)
    assert torch.allclose(bank.answer("located in"), mean)


def test_all_unk_label_warns(setup, caplog):
    vocab, _schema, emb = setup
    schema = LabelSchema("re", ("zzz qqq",))
    with caplog.at_level("WARNING"):
        bank = init_virtual_answer_words(schema, emb.weight.detach(), vocab)
    assert caplog.records
    assert torch.allclose(bank.answer("zzz qqq"), emb.weight[vocab.unk_id])


def test_empty_label_name_rejected(setup):
    vocab, _schema, emb = setup
    schema = LabelSchema("re", (" ",))
    with pytest.raises(ValueError):
        init_virtual_answer_words(schema, emb.weight.detach(), vocab)


def test_type_vectors_are_role_means(setup):
    vocab, schema, emb = setup
    bank = init_virtual_answer_words(schema, emb.weight.detach(), vocab)
    expected = bank.answer_words.detach().mean(dim=0)
    assert torch.allclose(bank.type_word("head"), expected)
    assert torch.allclose(bank.type_word("tail"), expected)


def test_orthogonal_hidden_uniform(setup):
    vocab, schema, emb = setup
    bank = init_virtual_answer_words(schema, emb.weight.detach(), vocab)
    with torch.no_grad():
        bank.answer_words.zero_()
        bank.answer_words[0, 0] = 1.0
        bank.answer_words[1, 1] = 1.0
        bank.answer_words[2, 2] = 1.0
    hidden = torch.zeros(8)
    hidden[5] = 2.0  # orthogonal to all three answers
    proba = score_relations(hidden, bank)
    assert torch.allclose(proba, torch.full((3,), 1 / 3), atol=1e-6)


def test_aligned_hidden_argmax(setup):
    vocab, schema, emb = setup
    bank = init_virtual_answer_words(schema, emb.weight.detach(), vocab)
    with torch.no_grad():
        bank.answer_words.zero_()
        bank.answer_words[0, 0] = 1.0
        bank.answer_words[1, 1] = 1.0
        bank.answer_words[2, 2] = 1.0
    hidden = torch.zeros(8)
    hidden[1] = 5.0
    assert int(score_relations(hidden, bank).argmax()) == 1


def test_three_relation_hand_softmax(setup):
    vocab, schema, emb = setup
    bank = init_virtual_answer_words(schema, emb.weight.detach(), vocab)
    hidden = torch.randn(8, dtype=torch.float64)
    bank = bank.double()
    with torch.no_grad():
        logits = [float(hidden @ bank.answer_words[i]) for i in range(3)]
    exp = [math.exp(l) for l in logits]
    expected = torch.tensor([e / sum(exp) for e in exp], dtype=torch.float64)
    assert torch.allclose(score_relations(hidden, bank), expected, atol=1e-9)


def test_shift_invariance(setup):
    vocab, schema, emb = setup
    bank = init_virtual_answer_words(schema, emb.weight.detach(), vocab)
    hidden = torch.randn(8)
    base = score_relations(hidden, bank)
    logits = relation_logits(hidden, bank) + 7.5
    assert torch.allclose(torch.softmax(logits, dim=-1), base, atol=1e-6)


def test_dim_mismatch_rejected(setup):
    vocab, schema, emb = setup
    bank = init_virtual_answer_words(schema, emb.weight.detach(), vocab)
    with pytest.raises(ValueError):
        score_relations(torch.zeros(5), bank)


def test_synergy_lambda_zero_exact(setup):
    vocab, schema, emb = setup
    bank = init_virtual_answer_words(schema, emb.weight.detach(), vocab)
    cls = torch.tensor(1.234567)
    out = synergy_loss(cls, bank, "head", "tail", "born", 0.0)
    assert out is cls


def test_synergy_translation_satisfied_is_zero(setup):
    vocab, schema, emb = setup
    bank = init_virtual_answer_words(schema, emb.weight.detach(), vocab)
    with torch.no_grad():
        bank.type_words[0].zero_()
        bank.type_words[1].copy_(bank.answer("born"))
    cls = torch.tensor(0.5)
    out = synergy_loss(cls, bank, "head", "tail", "born", 2.0)
    assert out.item() == pytest.approx(0.5, abs=1e-7)


def test_synergy_unit_vector_hand_case(setup):
    vocab, schema, emb = setup
    bank = init_virtual_answer_words(schema, emb.weight.detach(), vocab)
    with torch.no_grad():
        bank.type_words.zero_()
        bank.answer_words.zero_()
        bank.type_words[0, 0] = 1.0  # head = e0
        bank.answer_words[2, 1] = 1.0  # answer = e1
        bank.type_words[1, 2] = 1.0  # tail = e2
    # ||e0 + e1 - e2||^2 = 3
    out = synergy_loss(torch.tensor(0.0), bank, "head", "tail", "born", 0.5)
    assert out.item() == pytest.approx(1.5)


def test_synergy_linear_in_lambda(setup):
    vocab, schema, emb = setup
    bank = init_virtual_answer_words(schema, emb.weight.detach(), vocab)
    cls = torch.tensor(2.0)
    l1 = synergy_loss(cls, bank, "head", "tail", "born", 1.0) - cls
    for lam in (0.25, 0.5, 3.0):
        out = synergy_loss(cls, bank, "head", "tail", "born", lam)
        assert out.item() == pytest.approx((cls + lam * l1).item(), rel=1e-6)


def test_negative_lambda_rejected(setup):
    vocab, schema, emb = setup
    bank = init_virtual_answer_words(schema, emb.weight.detach(), vocab)
    with pytest.raises(ValueError):
        synergy_loss(torch.tensor(0.0), bank, "head", "tail", "born", -1.0)
