"""Few-shot RE files: one JSON record per line.

Record shape: ``{"token": [...], "h": {"name": ..., "pos": [s, e]},
"t": {...}, "relation": ...}`` with half-open token spans. Key order inside
a line does not matter for parsing; serialization emits the canonical order
above.
"""

from __future__ import annotations

import io
import json
from typing import Iterable, TextIO

from kextract.dataio.records import FewShotRelationRecord
from kextract.errors import ParseError, ValidationError


def _lines(stream: str | TextIO | Iterable[str]) -> Iterable[str]:
    if isinstance(stream, str):
        return io.StringIO(stream)
    return stream


def _entity(obj: dict, key: str, line_no: int) -> tuple[str, tuple[int, int]]:
    try:
        ent = obj[key]
        name = ent["name"]
        start, end = ent["pos"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"record is missing a well-formed {key!r} entity", line=line_no) from exc
    return name, (int(start), int(end))


def parse_fewshot_records(stream: str | TextIO | Iterable[str]) -> list[FewShotRelationRecord]:
    records = []
    for line_no, raw in enumerate(_lines(stream), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=line_no) from exc
        missing = {"token", "h", "t", "relation"} - set(obj)
        if missing:
            raise ParseError(f"record missing keys {sorted(missing)}", line=line_no)
        head, head_span = _entity(obj, "h", line_no)
        tail, tail_span = _entity(obj, "t", line_no)
        try:
            records.append(
                FewShotRelationRecord(
                    tokens=tuple(obj["token"]),
                    head=head,
                    head_span=head_span,
                    tail=tail,
                    tail_span=tail_span,
                    relation=obj["relation"],
                )
            )
        except ValidationError as exc:
            raise ValidationError(str(exc), line=line_no) from exc
    return records


def serialize_fewshot_records(records: list[FewShotRelationRecord]) -> str:
    lines = []
    for r in records:
        obj = {
            "token": list(r.tokens),
            "h": {"name": r.head, "pos": list(r.head_span)},
            "t": {"name": r.tail, "pos": list(r.tail_span)},
            "relation": r.relation,
        }
        lines.append(json.dumps(obj, ensure_ascii=False))
    return "".join(line + "\n" for line in lines)
