import math

import pytest
import torch
from torch import nn

from kextract.core import train, validate
from kextract.core.engine import new_artifact
from kextract.docre import (
    DocSynthConfig,
    DocumentRelationModel,
    EntityPairMatrix,
    UNetRefiner,
    adaptive_threshold_loss,
    build_pair_matrix,
    classify_pairs,
    docre_schema,
    generate_documents,
    pair_features,
    pool_entity,
    unet_refine,
)
from kextract.models import THRESHOLD_LABEL, default_spec, init_parameters

from .fd import check_gradients


def test_pool_single_mention_identity():
    v = torch.randn(1, 6)
    assert torch.equal(pool_entity(v), v[0])


def test_pool_two_equal_mentions_adds_ln2():
    v = torch.randn(1, 5, dtype=torch.float64)
    stacked = torch.cat([v, v], dim=0)
    assert torch.allclose(pool_entity(stacked), v[0] + math.log(2.0), atol=1e-12)


def test_pool_matches_direct_logsumexp():
    torch.manual_seed(0)
    v = torch.randn(3, 7, dtype=torch.float64)
    direct = torch.log(torch.exp(v).sum(dim=0))
    assert torch.allclose(pool_entity(v), direct, atol=1e-10)


def test_pool_order_invariant():
    torch.manual_seed(1)
    v = torch.randn(4, 6)
    assert torch.allclose(pool_entity(v), pool_entity(v.flip(0)), atol=1e-6)


def test_pool_zero_mentions_rejected():
    with pytest.raises(ValueError):
        pool_entity(torch.zeros(0, 4))


def test_pair_matrix_counting():
    torch.manual_seed(2)
    proj = nn.Linear(3 * 6, 4)
    m = build_pair_matrix(torch.randn(2, 6), proj)
    assert m.num_entities == 2 and m.channels == 4
    assert torch.equal(m.data[0, 0], torch.zeros(4))
    assert torch.equal(m.data[1, 1], torch.zeros(4))
    assert not torch.equal(m.data[0, 1], torch.zeros(4))
    m3 = build_pair_matrix(torch.randn(3, 6), proj)
    masked = sum(1 for i in range(3) if torch.equal(m3.data[i, i], torch.zeros(4)))
    assert masked == 3 and m3.data.shape == (3, 3, 4)


def test_pair_matrix_rejects_single_entity():
    with pytest.raises(ValueError):
        build_pair_matrix(torch.randn(1, 6), nn.Linear(18, 4))


def test_pair_features_swap_symmetry():
    torch.manual_seed(3)
    e = torch.randn(3, 5)
    feats = pair_features(e)
    d = 5
    ij, ji = feats[0, 2], feats[2, 0]
    assert torch.allclose(ij[:d], ji[d : 2 * d])
    assert torch.allclose(ij[d : 2 * d], ji[:d])
    assert torch.allclose(ij[2 * d :], ji[2 * d :])  # product term unchanged


def test_unet_identity_initialization():
    torch.manual_seed(4)
    refiner = UNetRefiner(3, 5, base=4)
    with torch.no_grad():
        for name, p in refiner.named_parameters():
            if not name.startswith("skip_proj"):
                p.zero_()
    matrix = EntityPairMatrix(torch.randn(6, 6, 3))
    out = unet_refine(matrix, refiner)
    image = matrix.data.permute(2, 0, 1).unsqueeze(0)
    expected = refiner.skip_proj(image)[0].permute(1, 2, 0)
    from kextract.docre import mask_diagonal

    assert torch.allclose(out.data, mask_diagonal(expected), atol=1e-6)


def test_unet_pads_and_crops_small_matrix():
    refiner = UNetRefiner(2, 2, base=4)
    init_parameters(refiner, 0)
    matrix = EntityPairMatrix(torch.randn(2, 2, 2))
    out = unet_refine(matrix, refiner)
    assert out.data.shape == (2, 2, 2)


@pytest.mark.parametrize("trial", range(3))
def test_unet_gradients(trial):
    torch.manual_seed(50 + trial)
    refiner = UNetRefiner(2, 2, base=2).to(torch.float64)
    init_parameters(refiner, trial)
    x = torch.randn(4, 4, 2, dtype=torch.float64, requires_grad=True)
    probe = torch.randn(4, 4, 2, dtype=torch.float64)
    params = [x] + list(refiner.parameters())

    def fn():
        return (unet_refine(EntityPairMatrix(x), refiner).data * probe).sum()

    check_gradients(fn, params)


SCHEMA = docre_schema(("r1", "r2"))


def test_classify_pairs_threshold_behaviour():
    n, channels = 3, 4
    head = nn.Linear(channels, len(SCHEMA.labels))
    with torch.no_grad():
        head.weight.zero_()
        head.bias.copy_(torch.tensor([1.0, -1.0, 0.0]))  # r1 above, r2 below threshold
    matrix = EntityPairMatrix(torch.randn(n, n, channels))
    pred = classify_pairs(matrix, head, SCHEMA)
    assert len(pred.cells) == n * n - n
    for cell in pred.cells.values():
        assert cell.relations == frozenset({"r1"})
    with torch.no_grad():
        head.bias.copy_(torch.tensor([-1.0, -2.0, 0.0]))
    pred = classify_pairs(matrix, head, SCHEMA)
    assert all(cell.relations == frozenset() for cell in pred.cells.values())


def test_classify_pairs_matches_comparison_oracle():
    torch.manual_seed(5)
    head = nn.Linear(6, len(SCHEMA.labels))
    init_parameters(head, 1)
    matrix = EntityPairMatrix(torch.randn(4, 4, 6))
    pred = classify_pairs(matrix, head, SCHEMA)
    with torch.no_grad():
        logits = head(matrix.data)
    th = SCHEMA.labels.index(THRESHOLD_LABEL)
    for (i, j), cell in pred.cells.items():
        expected = {
            label
            for k, label in enumerate(SCHEMA.labels)
            if label != THRESHOLD_LABEL and float(logits[i, j, k]) > float(logits[i, j, th])
        }
        assert cell.relations == frozenset(expected)
        assert i != j


def test_adaptive_threshold_loss_separates():
    logits = torch.tensor([[5.0, -5.0, 0.0]])
    positives = torch.tensor([[1.0, 0.0, 0.0]])
    loss = adaptive_threshold_loss(logits, positives, th_index=2)
    assert loss.item() < 0.02
    bad = adaptive_threshold_loss(
        torch.tensor([[-5.0, 5.0, 0.0]]), positives, th_index=2
    )
    assert bad.item() > 5.0


def make_model(seed=0, kind="rnn"):
    docs, relations, vocab = generate_documents(DocSynthConfig(num_docs=6, seed=3))
    spec = default_spec(kind, embedding_dim=16, hidden_dim=24)
    model = DocumentRelationModel(spec, docre_schema(relations), vocab)
    init_parameters(model, seed)
    return model, docs


def test_single_entity_document_empty():
    model, _docs = make_model()
    from kextract.dataio import DocumentRecord, Mention

    doc = DocumentRecord(
        title="solo",
        sentences=(("f_0", "marker_T0", "e0_0"),),
        entities=((Mention("marker_T0 e0_0", 0, (1, 3), "T0"),),),
    )
    assert model.doc_triples(doc) == []


def test_mention_permutation_invariance():
    model, docs = make_model()
    doc = next(d for d in docs if any(len(c) > 1 for c in d.entities))
    permuted = type(doc)(
        title=doc.title,
        sentences=doc.sentences,
        entities=tuple(tuple(reversed(c)) for c in doc.entities),
        relation_labels=doc.relation_labels,
    )
    model.eval()
    with torch.no_grad():
        a = model.doc_triples(doc)
        b = model.doc_triples(permuted)
    assert {(t.head_index, t.tail_index, t.relation) for t in a} == {
        (t.head_index, t.tail_index, t.relation) for t in b
    }


def test_entity_permutation_equivariance():
    model, docs = make_model()
    doc = docs[0]
    n = len(doc.entities)
    perm = list(reversed(range(n)))
    inverse = [perm.index(i) for i in range(n)]
    permuted = type(doc)(
        title=doc.title,
        sentences=doc.sentences,
        entities=tuple(doc.entities[p] for p in perm),
        relation_labels=tuple(
            type(l)(inverse[l.head], inverse[l.tail], l.relation, l.evidence)
            for l in doc.relation_labels
        ),
    )
    model.eval()
    with torch.no_grad():
        base = {(t.head_index, t.tail_index, t.relation) for t in model.doc_triples(doc)}
        moved = {(t.head_index, t.tail_index, t.relation) for t in model.doc_triples(permuted)}
    assert moved == {(inverse[h], inverse[t], r) for h, t, r in base}


def test_diagonal_never_predicted():
    model, docs = make_model(seed=7)
    with torch.no_grad():
        for t in model.doc_triples(docs[0]):
            assert t.head_index != t.tail_index


def test_document_training_learns_rule():
    docs, relations, vocab = generate_documents(DocSynthConfig(num_docs=40, seed=1))
    spec = default_spec("rnn", embedding_dim=16, hidden_dim=24)
    artifact = new_artifact(spec, docre_schema(relations), vocab, scenario="document", seed=0)
    artifact, _history = train(
        artifact,
        docs[:30],
        {"epochs": 30, "lr": 0.01, "optimizer": "adam", "batch_size": 4, "seed": 0},
        val_dataset=docs[30:],
    )
    report = validate(artifact, docs[30:])
    assert report.f1 >= 0.9
