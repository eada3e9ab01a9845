"""Document-corpus files for document-level RE.

One JSON record per line (a whole-file JSON array is also accepted and
normalized on serialize). Field names follow the DocRED convention::

    {"title": ..., "sents": [[tok, ...], ...],
     "vertexSet": [[{"name": ..., "sent_id": ..., "pos": [s, e], "type": ...}, ...], ...],
     "labels": [{"h": ..., "t": ..., "r": ..., "evidence": [...]}, ...]}

In repair mode a mention whose recovered text differs from its name only by
case/whitespace is accepted; strict mode requires exact recovery too.
"""

from __future__ import annotations

import io
import json
import logging
from typing import Iterable, TextIO

from kextract.dataio.records import DocumentRecord, Mention, RelationLabel
from kextract.errors import ParseError, ValidationError

logger = logging.getLogger(__name__)


def _read_objects(stream: str | TextIO | Iterable[str]):
    if not isinstance(stream, str):
        stream = "".join(stream)
    stripped = stream.lstrip()
    if stripped.startswith("["):
        try:
            objects = json.loads(stream)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON array: {exc.msg}", line=exc.lineno) from exc
        yield from ((obj, i + 1) for i, obj in enumerate(objects))
        return
    for line_no, raw in enumerate(io.StringIO(stream), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            yield json.loads(line), line_no
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=line_no) from exc


def _norm(text: str) -> str:
    return "".join(text.split()).lower()


def parse_document_corpus(
    stream: str | TextIO | Iterable[str], mode: str = "repair"
) -> list[DocumentRecord]:
    if mode not in ("strict", "repair"):
        raise ValueError(f"unknown mode {mode!r}")
    docs = []
    for obj, line_no in _read_objects(stream):
        try:
            sentences = tuple(tuple(sent) for sent in obj["sents"])
            clusters = []
            for cluster in obj["vertexSet"]:
                mentions = tuple(
                    Mention(
                        name=m["name"],
                        sent_id=int(m["sent_id"]),
                        span=(int(m["pos"][0]), int(m["pos"][1])),
                        entity_type=m["type"],
                    )
                    for m in cluster
                )
                clusters.append(mentions)
            labels = tuple(
                RelationLabel(
                    head=int(l["h"]),
                    tail=int(l["t"]),
                    relation=l["r"],
                    evidence=tuple(int(e) for e in l.get("evidence", ())),
                )
                for l in obj.get("labels", ())
            )
            doc = DocumentRecord(
                title=obj["title"],
                sentences=sentences,
                entities=tuple(clusters),
                relation_labels=labels,
            )
        except ValidationError as exc:
            raise ValidationError(str(exc), line=line_no) from exc
        except (KeyError, TypeError, IndexError) as exc:
            raise ParseError(f"malformed document record: {exc!r}", line=line_no) from exc
        for cluster in doc.entities:
            for m in cluster:
                recovered = doc.mention_text(m)
                if recovered == m.name:
                    continue
                if mode == "repair" and _norm(recovered) == _norm(m.name):
                    logger.warning(
                        "line %d: mention %r recovered as %r", line_no, m.name, recovered
                    )
                    continue
                raise ValidationError(
                    f"mention {m.name!r} spans tokens spelling {recovered!r}", line=line_no
                )
        docs.append(doc)
    return docs


def serialize_document_corpus(docs: list[DocumentRecord]) -> str:
    lines = []
    for doc in docs:
        obj = {
            "title": doc.title,
            "sents": [list(sent) for sent in doc.sentences],
            "vertexSet": [
                [
                    {
                        "name": m.name,
                        "sent_id": m.sent_id,
                        "pos": list(m.span),
                        "type": m.entity_type,
                    }
                    for m in cluster
                ]
                for cluster in doc.entities
            ],
            "labels": [
                {"h": l.head, "t": l.tail, "r": l.relation, "evidence": list(l.evidence)}
                for l in doc.relation_labels
            ],
        }
        lines.append(json.dumps(obj, ensure_ascii=False))
    return "".join(line + "\n" for line in lines)
