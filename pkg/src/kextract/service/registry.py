"""Schema registry constraining what the extraction service may emit.

Registry file format (versioned plain text)::

    version: demo-1
    entity PER
    entity ORG
    attribute birth_date
    relation works_for: PER -> ORG

Every relation's domain and range must be declared entity types. Served
triples out of schema scope are filtered, never emitted.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from kextract.errors import ParseError, ValidationError


@dataclass(frozen=True)
class RelationType:
    name: str
    head_type: str
    tail_type: str


@dataclass(frozen=True)
class SchemaRegistry:
    version: str
    entity_types: frozenset[str]
    relations: tuple[RelationType, ...]
    attribute_types: frozenset[str] = frozenset()

    def __post_init__(self):
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise ValidationError("relation names must be unique")
        for r in self.relations:
            if r.head_type not in self.entity_types or r.tail_type not in self.entity_types:
                raise ValidationError(
                    f"relation {r.name!r} uses undeclared entity types "
                    f"{r.head_type!r} -> {r.tail_type!r}"
                )

    def relation(self, name: str) -> RelationType | None:
        for r in self.relations:
            if r.name == name:
                return r
        return None

    def validates(self, triple: "Triple") -> bool:
        r = self.relation(triple.relation)
        return (
            r is not None
            and triple.head[1] == r.head_type
            and triple.tail[1] == r.tail_type
        )

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "entity_types": sorted(self.entity_types),
            "attribute_types": sorted(self.attribute_types),
            "relations": [
                {"name": r.name, "head_type": r.head_type, "tail_type": r.tail_type}
                for r in self.relations
            ],
        }


@dataclass(frozen=True)
class Triple:
    head: tuple[str, str]  # (text, entity type)
    relation: str
    tail: tuple[str, str]
    confidence: float
    provenance: str = ""

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"confidence {self.confidence} outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "head": {"text": self.head[0], "type": self.head[1]},
            "relation": self.relation,
            "tail": {"text": self.tail[0], "type": self.tail[1]},
            "confidence": self.confidence,
            "provenance": self.provenance,
        }


def filter_by_schema(candidates: list[Triple], registry: SchemaRegistry) -> list[Triple]:
    """Keep exactly the candidates whose relation exists and whose head/tail
    types satisfy its domain/range; input order is preserved."""
    return [t for t in candidates if registry.validates(t)]


def parse_registry(text: str) -> SchemaRegistry:
    version = None
    entities: set[str] = set()
    attributes: set[str] = set()
    relations: list[RelationType] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("version:"):
            version = line.split(":", 1)[1].strip()
        elif line.startswith("entity "):
            entities.add(line.split(None, 1)[1].strip())
        elif line.startswith("attribute "):
            attributes.add(line.split(None, 1)[1].strip())
        elif line.startswith("relation "):
            body = line[len("relation ") :]
            if ":" not in body or "->" not in body:
                raise ParseError(
                    f"expected 'relation name: HEAD -> TAIL', got {line!r}", line=line_no
                )
            name, types = body.split(":", 1)
            head_type, tail_type = (p.strip() for p in types.split("->", 1))
            relations.append(RelationType(name.strip(), head_type, tail_type))
        else:
            raise ParseError(f"unrecognized registry line {line!r}", line=line_no)
    if version is None:
        raise ParseError("registry must declare a version", line=1)
    return SchemaRegistry(
        version=version,
        entity_types=frozenset(entities),
        relations=tuple(relations),
        attribute_types=frozenset(attributes),
    )


def serialize_registry(registry: SchemaRegistry) -> str:
    lines = [f"version: {registry.version}"]
    lines.extend(f"entity {e}" for e in sorted(registry.entity_types))
    lines.extend(f"attribute {a}" for a in sorted(registry.attribute_types))
    lines.extend(
        f"relation {r.name}: {r.head_type} -> {r.tail_type}" for r in registry.relations
    )
    return "".join(l + "\n" for l in lines)


def load_registry(path: str | Path) -> SchemaRegistry:
    return parse_registry(Path(path).read_text(encoding="utf-8"))
