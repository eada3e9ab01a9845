"""Parsed dataset records and their invariants.

Every record validates itself on construction; parsers translate the raised
:class:`ValidationError` into one that names the offending line or row.
All character offsets are Unicode code points.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from kextract.errors import ValidationError

_TAG_RE = re.compile(r"^(O|[BI]-\S+)$")


def tag_type(tag: str) -> str | None:
    """Entity type of a BIO tag, or None for O."""
    return None if tag == "O" else tag.split("-", 1)[1]


def check_bio_transitions(tags: tuple[str, ...] | list[str]) -> int | None:
    """Return the index of the first illegal ``I-X`` continuation, else None."""
    prev = "O"
    for i, tag in enumerate(tags):
        if tag.startswith("I-"):
            ok = (prev.startswith("B-") or prev.startswith("I-")) and tag_type(prev) == tag_type(tag)
            if not ok:
                return i
        prev = tag
    return None


def bio_spans(tags: tuple[str, ...] | list[str]) -> list[tuple[int, int, str]]:
    """Decode BIO tags into maximal (start, end, type) spans, end exclusive.

    An ``I-X`` without a matching opener starts a new span (the usual CoNLL
    repair); legal inputs are unaffected.
    """
    spans: list[tuple[int, int, str]] = []
    start: int | None = None
    current: str | None = None

    def close(i: int):
        nonlocal start, current
        if start is not None:
            spans.append((start, i, current))
        start, current = None, None

    for i, tag in enumerate(tags):
        if tag == "O":
            close(i)
        elif tag.startswith("B-") or tag_type(tag) != current:
            close(i)
            start, current = i, tag_type(tag)
    close(len(tags))
    return spans


@dataclass(frozen=True)
class TaggedSentence:
    """A tokenized sentence with one BIO tag per token."""

    tokens: tuple[str, ...]
    tags: tuple[str, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.tags):
            raise ValidationError(
                f"{len(self.tokens)} tokens but {len(self.tags)} tags"
            )
        for tok in self.tokens:
            if not tok or any(ch.isspace() for ch in tok):
                raise ValidationError(f"bad token {tok!r}: empty or contains whitespace")
        for tag in self.tags:
            if not _TAG_RE.match(tag):
                raise ValidationError(f"bad tag {tag!r}: expected O, B-<type> or I-<type>")

    def entity_spans(self) -> list[tuple[int, int, str]]:
        return bio_spans(self.tags)


def _check_offset(sentence: str, text: str, offset: int, what: str):
    if offset < 0 or sentence[offset : offset + len(text)] != text:
        raise ValidationError(
            f"{what} offset {offset} does not locate {text!r} in sentence"
        )


@dataclass(frozen=True)
class RelationRecord:
    """One standard-RE example: a sentence, a relation, head/tail with offsets."""

    sentence: str
    relation: str
    head: str
    head_offset: int
    tail: str
    tail_offset: int

    def __post_init__(self):
        _check_offset(self.sentence, self.head, self.head_offset, "head")
        _check_offset(self.sentence, self.tail, self.tail_offset, "tail")
        if self.head_offset == self.tail_offset:
            raise ValidationError("head and tail offsets coincide")


@dataclass(frozen=True)
class AttributeRecord:
    """One AE example: sentence, attribute type, entity and value with offsets."""

    sentence: str
    attribute: str
    entity: str
    entity_offset: int
    attribute_value: str
    attribute_value_offset: int

    def __post_init__(self):
        _check_offset(self.sentence, self.entity, self.entity_offset, "entity")
        _check_offset(
            self.sentence, self.attribute_value, self.attribute_value_offset, "attribute value"
        )


def _strip_ws(s: str) -> str:
    return "".join(s.split())


@dataclass(frozen=True)
class FewShotRelationRecord:
    """Few-shot RE example: tokens plus head/tail (name, [start, end) span)."""

    tokens: tuple[str, ...]
    head: str
    head_span: tuple[int, int]
    tail: str
    tail_span: tuple[int, int]
    relation: str

    def __post_init__(self):
        for name, (start, end) in (("head", self.head_span), ("tail", self.tail_span)):
            if not (0 <= start < end <= len(self.tokens)):
                raise ValidationError(
                    f"{name} span [{start}, {end}) out of range for {len(self.tokens)} tokens"
                )
        hs, he = self.head_span
        ts, te = self.tail_span
        if hs < te and ts < he:
            raise ValidationError("head and tail spans overlap")
        for name, (start, end) in (("head", self.head_span), ("tail", self.tail_span)):
            mention = getattr(self, name)
            if _strip_ws("".join(self.tokens[start:end])) != _strip_ws(mention):
                raise ValidationError(
                    f"{name} span tokens {self.tokens[start:end]!r} do not spell {mention!r}"
                )


@dataclass(frozen=True)
class Mention:
    """A single entity mention inside a document sentence; span is [start, end) tokens."""

    name: str
    sent_id: int
    span: tuple[int, int]
    entity_type: str


@dataclass(frozen=True)
class RelationLabel:
    head: int
    tail: int
    relation: str
    evidence: tuple[int, ...] = ()


@dataclass(frozen=True)
class DocumentRecord:
    """A document with entity clusters and document-level relation labels."""

    title: str
    sentences: tuple[tuple[str, ...], ...]
    entities: tuple[tuple[Mention, ...], ...]
    relation_labels: tuple[RelationLabel, ...] = ()

    def __post_init__(self):
        for ci, cluster in enumerate(self.entities):
            if not cluster:
                raise ValidationError(f"entity cluster {ci} has no mentions")
            for m in cluster:
                if not 0 <= m.sent_id < len(self.sentences):
                    raise ValidationError(
                        f"mention {m.name!r} sentence id {m.sent_id} out of range"
                    )
                start, end = m.span
                if not (0 <= start < end <= len(self.sentences[m.sent_id])):
                    raise ValidationError(
                        f"mention {m.name!r} span [{start}, {end}) out of range in sentence {m.sent_id}"
                    )
        for label in self.relation_labels:
            if label.head == label.tail:
                raise ValidationError(f"self-relation on entity {label.head}")
            for idx in (label.head, label.tail):
                if not 0 <= idx < len(self.entities):
                    raise ValidationError(f"entity index {idx} out of range in relation label")
            for sid in label.evidence:
                if not 0 <= sid < len(self.sentences):
                    raise ValidationError(f"evidence sentence id {sid} out of range")

    def mention_text(self, mention: Mention) -> str:
        start, end = mention.span
        return " ".join(self.sentences[mention.sent_id][start:end])

    def canonical_name(self, entity_index: int) -> str:
        return self.entities[entity_index][0].name
