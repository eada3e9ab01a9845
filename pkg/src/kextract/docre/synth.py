"""Synthetic document generator with type-determined relations.

Every entity's mentions carry a type-marker token, the relation between two
entities is a fixed function of their ordered types, and mentions are
scattered across sentences so most related pairs never share one.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from kextract.dataio.records import DocumentRecord, Mention, RelationLabel
from kextract.dataio.vocab import build_vocab


@dataclass(frozen=True)
class DocSynthConfig:
    num_docs: int = 40
    entity_range: tuple[int, int] = (3, 5)
    num_types: int = 3
    seed: int = 0
    co_mention_rate: float = 0.3  # entities given an extra same-sentence mention


def type_rule(num_types: int) -> dict[tuple[str, str], str]:
    """Relation for every ordered pair of distinct types."""
    types = [f"T{k}" for k in range(num_types)]
    return {
        (a, b): f"rel_{a}_{b}" for a in types for b in types if a != b
    }


def generate_documents(config: DocSynthConfig):
    """Returns (documents, relations, vocabulary)."""
    rng = random.Random(config.seed)
    rule = type_rule(config.num_types)
    relations = tuple(sorted(set(rule.values())))
    types = [f"T{k}" for k in range(config.num_types)]
    fillers = [f"f_{i}" for i in range(30)]
    markers = {t: f"marker_{t}" for t in types}

    docs = []
    for d in range(config.num_docs):
        num_entities = rng.randint(*config.entity_range)
        entity_types = [rng.choice(types) for _ in range(num_entities)]
        entity_tokens = [f"e{d}_{i}" for i in range(num_entities)]
        # one sentence per entity: cross-sentence by construction
        sentences: list[list[str]] = []
        mentions: list[list[Mention]] = [[] for _ in range(num_entities)]
        for i in range(num_entities):
            left = rng.choices(fillers, k=rng.randint(1, 2))
            right = rng.choices(fillers, k=rng.randint(1, 2))
            tokens = left + [markers[entity_types[i]], entity_tokens[i]] + right
            start = len(left)
            mentions[i].append(
                Mention(
                    name=f"{markers[entity_types[i]]} {entity_tokens[i]}",
                    sent_id=len(sentences),
                    span=(start, start + 2),
                    entity_type=entity_types[i],
                )
            )
            sentences.append(tokens)
        # a few co-mention sentences so a sentence-local baseline is not empty
        for i in range(num_entities):
            if rng.random() < config.co_mention_rate and num_entities >= 2:
                j = rng.choice([k for k in range(num_entities) if k != i])
                tokens = [
                    markers[entity_types[i]],
                    entity_tokens[i],
                    rng.choice(fillers),
                    markers[entity_types[j]],
                    entity_tokens[j],
                ]
                sid = len(sentences)
                mentions[i].append(
                    Mention(
                        name=f"{markers[entity_types[i]]} {entity_tokens[i]}",
                        sent_id=sid,
                        span=(0, 2),
                        entity_type=entity_types[i],
                    )
                )
                mentions[j].append(
                    Mention(
                        name=f"{markers[entity_types[j]]} {entity_tokens[j]}",
                        sent_id=sid,
                        span=(3, 5),
                        entity_type=entity_types[j],
                    )
                )
                sentences.append(tokens)
        labels = []
        for i in range(num_entities):
            for j in range(num_entities):
                if i == j:
                    continue
                key = (entity_types[i], entity_types[j])
                if key in rule:
                    labels.append(RelationLabel(i, j, rule[key]))
        docs.append(
            DocumentRecord(
                title=f"doc_{d}",
                sentences=tuple(tuple(s) for s in sentences),
                entities=tuple(tuple(ms) for ms in mentions),
                relation_labels=tuple(labels),
            )
        )
    vocab_tokens = fillers + list(markers.values())
    for doc in docs:
        for sent in doc.sentences:
            vocab_tokens.extend(sent)
    vocab = build_vocab([vocab_tokens])
    return docs, relations, vocab
