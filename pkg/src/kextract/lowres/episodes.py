"""K-shot episode sampling with reproducible manifests."""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path

from kextract.dataio.records import TaggedSentence

logger = logging.getLogger(__name__)

UNITS = ("relation-class", "entity-category")


@dataclass(frozen=True)
class Episode:
    k: int
    support: tuple[int, ...]
    query: tuple[int, ...]
    seed: int
    unit: str

    def __post_init__(self):
        if set(self.support) & set(self.query):
            raise ValueError("support and query overlap")


def _classes_of(record, unit: str) -> set[str]:
    if unit == "relation-class":
        return {record.relation}
    if isinstance(record, TaggedSentence):
        return {etype for _s, _e, etype in record.entity_spans()}
    raise ValueError(f"cannot derive entity categories from {type(record).__name__}")


def sample_kshot(dataset: list, k: int, seed: int, unit: str = "relation-class") -> Episode:
    """Deterministic support/query split with K instances per class.

    A class with fewer than K instances contributes everything, with a
    warning. With entity categories a sentence can serve several classes;
    one already in support counts toward each category it contains.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if unit not in UNITS:
        raise ValueError(f"unknown unit {unit!r}")
    if not dataset:
        raise ValueError("dataset is empty")
    membership = [_classes_of(record, unit) for record in dataset]
    classes = sorted(set().union(*membership))
    rng = random.Random(seed)
    support: set[int] = set()
    for cls in classes:
        candidates = [i for i, m in enumerate(membership) if cls in m]
        have = sum(1 for i in support if cls in membership[i])
        need = k - have
        if need <= 0:
            continue
        pool = [i for i in candidates if i not in support]
        if len(candidates) < k:
            logger.warning(
                "class %r has %d instances, fewer than K=%d; taking all", cls, len(candidates), k
            )
        take = pool if len(pool) <= need else rng.sample(pool, need)
        support.update(take)
    query = tuple(i for i in range(len(dataset)) if i not in support)
    return Episode(k=k, support=tuple(sorted(support)), query=query, seed=seed, unit=unit)


def write_manifest(episode: Episode, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"k": episode.k, "seed": episode.seed, "unit": episode.unit}) + "\n")
        for idx in episode.support:
            fh.write(json.dumps({"id": idx, "role": "support"}) + "\n")
        for idx in episode.query:
            fh.write(json.dumps({"id": idx, "role": "query"}) + "\n")


def read_manifest(path: str | Path) -> Episode:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = json.loads(lines[0])
    support, query = [], []
    for line in lines[1:]:
        row = json.loads(line)
        (support if row["role"] == "support" else query).append(int(row["id"]))
    return Episode(
        k=int(header["k"]),
        support=tuple(support),
        query=tuple(query),
        seed=int(header["seed"]),
        unit=header["unit"],
    )
