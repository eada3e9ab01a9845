import pytest

from kextract.lowres import Episode, read_manifest, sample_kshot, write_manifest

from .synthdata import ner_corpus, relation_corpus


@pytest.fixture(scope="module")
def re_data():
    records, _schema, _vocab = relation_corpus(100, num_relations=3, vocab_size=60, seed=5)
    return records


def test_counting_oracle_k8_three_classes(re_data):
    episode = sample_kshot(re_data, 8, seed=0)
    assert len(episode.support) == 24
    assert set(episode.support).isdisjoint(episode.query)
    assert len(episode.support) + len(episode.query) == len(re_data)
    for cls in {r.relation for r in re_data}:
        in_support = sum(1 for i in episode.support if re_data[i].relation == cls)
        assert in_support == 8


def test_same_seed_identical(re_data):
    a = sample_kshot(re_data, 8, seed=42)
    b = sample_kshot(re_data, 8, seed=42)
    assert a == b


def test_different_seed_differs(re_data):
    assert sample_kshot(re_data, 8, seed=1) != sample_kshot(re_data, 8, seed=2)


@pytest.mark.parametrize("k", [1, 8, 16, 32])
def test_per_class_counts_all_k(re_data, k):
    episode = sample_kshot(re_data, k, seed=3)
    for cls in {r.relation for r in re_data}:
        population = sum(1 for r in re_data if r.relation == cls)
        in_support = sum(1 for i in episode.support if re_data[i].relation == cls)
        assert in_support == min(k, population)


def test_small_class_takes_all_with_warning(re_data, caplog):
    with caplog.at_level("WARNING"):
        episode = sample_kshot(re_data, 1000, seed=0)
    assert caplog.records
    assert len(episode.support) == len(re_data)
    assert episode.query == ()


def test_empty_dataset_rejected():
    with pytest.raises(ValueError):
        sample_kshot([], 8, seed=0)


def test_bad_k_and_unit(re_data):
    with pytest.raises(ValueError):
        sample_kshot(re_data, 0, seed=0)
    with pytest.raises(ValueError):
        sample_kshot(re_data, 2, seed=0, unit="bogus")


def test_entity_category_unit():
    sentences, _schema, _vocab = ner_corpus(80, seed=9)
    episode = sample_kshot(sentences, 5, seed=0, unit="entity-category")
    categories = {t for s in sentences for _a, _b, t in s.entity_spans()}
    for cls in categories:
        in_support = sum(
            1
            for i in episode.support
            if cls in {t for _a, _b, t in sentences[i].entity_spans()}
        )
        assert in_support >= 5  # multi-category sentences may exceed K
    assert set(episode.support).isdisjoint(episode.query)


def test_overlap_rejected_by_episode_invariant():
    with pytest.raises(ValueError):
        Episode(k=1, support=(0, 1), query=(1, 2), seed=0, unit="relation-class")


def test_manifest_round_trip(tmp_path, re_data):
    episode = sample_kshot(re_data, 4, seed=17)
    path = tmp_path / "episode.jsonl"
    write_manifest(episode, path)
    assert read_manifest(path) == episode
