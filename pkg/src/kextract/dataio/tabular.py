"""Six-column CSV formats for standard RE and AE.

Dialect: comma-separated, double-quote quoting, UTF-8, header required.
Normalized form uses minimal quoting and ``\\n`` line endings with a single
trailing newline.
"""

from __future__ import annotations

import csv
import io
from typing import Iterable, TextIO

from kextract.dataio.records import AttributeRecord, RelationRecord
from kextract.errors import ParseError, ValidationError

RELATION_HEADER = ("sentence", "relation", "head", "head_offset", "tail", "tail_offset")
ATTRIBUTE_HEADER = (
    "sentence",
    "attribute",
    "entity",
    "entity_offset",
    "attribute_value",
    "attribute_value_offset",
)


def _open(stream: str | TextIO | Iterable[str]):
    if isinstance(stream, str):
        return io.StringIO(stream)
    return stream


def _parse_six_column(stream, header: tuple[str, ...], build):
    reader = csv.reader(_open(stream))
    try:
        first = next(reader)
    except StopIteration:
        raise ParseError("empty file: header row required", line=1) from None
    if tuple(first) != header:
        raise ParseError(
            f"bad header {first!r}; expected {list(header)!r}", line=1
        )
    records = []
    for row_no, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(
                f"expected {len(header)} fields, got {len(row)}", line=row_no + 1
            )
        try:
            records.append(build(row, row_no))
        except ValidationError:
            raise
        except ValueError as exc:
            raise ParseError(str(exc), line=row_no + 1) from exc
    return records


def _int_field(value: str, name: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {value!r}") from None


def parse_relation_csv(stream: str | TextIO | Iterable[str]) -> list[RelationRecord]:
    def build(row, row_no):
        try:
            return RelationRecord(
                sentence=row[0],
                relation=row[1],
                head=row[2],
                head_offset=_int_field(row[3], "head_offset"),
                tail=row[4],
                tail_offset=_int_field(row[5], "tail_offset"),
            )
        except ValidationError as exc:
            raise ValidationError(str(exc), row=row_no) from exc

    return _parse_six_column(stream, RELATION_HEADER, build)


def parse_attribute_csv(stream: str | TextIO | Iterable[str]) -> list[AttributeRecord]:
    def build(row, row_no):
        try:
            return AttributeRecord(
                sentence=row[0],
                attribute=row[1],
                entity=row[2],
                entity_offset=_int_field(row[3], "entity_offset"),
                attribute_value=row[4],
                attribute_value_offset=_int_field(row[5], "attribute_value_offset"),
            )
        except ValidationError as exc:
            raise ValidationError(str(exc), row=row_no) from exc

    return _parse_six_column(stream, ATTRIBUTE_HEADER, build)


def _serialize(header: tuple[str, ...], rows: Iterable[tuple]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return out.getvalue()


def serialize_relation_csv(records: list[RelationRecord]) -> str:
    return _serialize(
        RELATION_HEADER,
        (
            (r.sentence, r.relation, r.head, r.head_offset, r.tail, r.tail_offset)
            for r in records
        ),
    )


def serialize_attribute_csv(records: list[AttributeRecord]) -> str:
    return _serialize(
        ATTRIBUTE_HEADER,
        (
            (
                r.sentence,
                r.attribute,
                r.entity,
                r.entity_offset,
                r.attribute_value,
                r.attribute_value_offset,
            )
            for r in records
        ),
    )
