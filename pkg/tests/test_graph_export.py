import random

from kextract.service import Triple, export_dot, export_graph


def t(head, rel, tail, conf=0.8, ht="PER", tt="ORG"):
    return Triple((head, ht), rel, (tail, tt), conf)


def test_empty_graph():
    doc = export_graph([])
    assert doc == {"nodes": [], "links": []}
    dot = export_dot([])
    assert dot.startswith("digraph") and dot.rstrip().endswith("}")


def test_shared_head_deduplicates_nodes():
    triples = [t("alice", "works_for", "acme"), t("alice", "works_for", "globex")]
    doc = export_graph(triples)
    assert len(doc["nodes"]) == 3
    assert len(doc["links"]) == 2


def test_node_identity_is_text_and_type():
    triples = [
        Triple(("paris", "PER"), "works_for", ("acme", "ORG"), 0.5),
        Triple(("paris", "LOC"), "works_for", ("acme", "ORG"), 0.5),
    ]
    assert len(export_graph(triples)["nodes"]) == 3


def test_dot_deterministic_under_permutation():
    triples = [t(f"p{i}", "works_for", f"o{i % 3}", conf=i / 10) for i in range(8)]
    base = export_dot(triples)
    for seed in range(5):
        shuffled = triples[:]
        random.Random(seed).shuffle(shuffled)
        assert export_dot(shuffled) == base
        assert export_graph(shuffled) == export_graph(triples)


def test_dot_quotes_special_characters():
    dot = export_dot([t('he said "hi"', "works_for", "a\\b")])
    assert '\\"hi\\"' in dot
    assert "a\\\\b" in dot
    assert dot.count("->") == 1


def test_one_edge_per_triple():
    triples = [t("a", "works_for", "b"), t("a", "works_for", "b")]
    assert len(export_graph(triples)["links"]) == 2
