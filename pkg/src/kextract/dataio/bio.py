"""Two-column BIO files: ``WORD TAG`` per line, blank line between sentences.

Normalized form: one space between columns, sentences separated by exactly
one blank line, single trailing newline. ``serialize_bio(parse_bio(x))`` is
byte-identical to a normalized ``x``.
"""

from __future__ import annotations

import io
import logging
import re
from typing import Iterable, TextIO

from kextract.dataio.records import TaggedSentence, check_bio_transitions, tag_type
from kextract.errors import ParseError, ValidationError

logger = logging.getLogger(__name__)

_TAG_RE = re.compile(r"^(O|[BI]-\S+)$")


def _as_lines(stream: str | TextIO | Iterable[str]) -> Iterable[str]:
    if isinstance(stream, str):
        return io.StringIO(stream)
    return stream


def parse_bio(stream: str | TextIO | Iterable[str], mode: str = "strict") -> list[TaggedSentence]:
    """Parse BIO lines into sentences.

    ``strict`` rejects an ``I-X`` that does not continue a ``B-X``/``I-X``;
    ``repair`` rewrites it to ``B-X`` and logs a warning.
    """
    if mode not in ("strict", "repair"):
        raise ValueError(f"unknown mode {mode!r}")
    sentences: list[TaggedSentence] = []
    tokens: list[str] = []
    tags: list[str] = []
    first_line = 0

    def flush(line_no: int):
        nonlocal tokens, tags
        if not tokens:
            return
        bad = check_bio_transitions(tags)
        if bad is not None:
            if mode == "strict":
                raise ParseError(
                    f"illegal continuation {tags[bad]!r} (starts no entity)",
                    line=first_line + bad,
                )
            repaired = f"B-{tag_type(tags[bad])}"
            logger.warning(
                "line %d: rewriting %s to %s", first_line + bad, tags[bad], repaired
            )
            tags[bad] = repaired
            flush(line_no)  # re-check later positions
            return
        try:
            sentences.append(TaggedSentence(tuple(tokens), tuple(tags)))
        except ValidationError as exc:
            raise ParseError(str(exc), line=first_line) from exc
        tokens, tags = [], []

    line_no = 0
    for line_no, raw in enumerate(_as_lines(stream), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush(line_no)
            continue
        fields = line.split(" ")
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise ParseError(
                f"expected two space-separated fields, got {line!r}", line=line_no
            )
        word, tag = fields
        if not _TAG_RE.match(tag):
            raise ParseError(f"bad tag {tag!r}", line=line_no)
        if not tokens:
            first_line = line_no
        tokens.append(word)
        tags.append(tag)
    flush(line_no + 1)
    return sentences


def serialize_bio(sentences: list[TaggedSentence]) -> str:
    blocks = [
        "\n".join(f"{tok} {tag}" for tok, tag in zip(s.tokens, s.tags)) for s in sentences
    ]
    if not blocks:
        return ""
    return "\n\n".join(blocks) + "\n"
