"""Prompt templates for few-shot relation classification.

Template notation is whitespace-separated slots: ``{SENT}`` ``{HEAD}``
``{TAIL}`` ``{TYPE_H}`` ``{TYPE_T}`` ``{MASK}``; anything else is a literal
token. Entity-type slots render as reserved virtual-token ids placed right
where the template puts them (conventionally adjacent to the mentions).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from kextract.dataio.records import FewShotRelationRecord
from kextract.dataio.vocab import Vocabulary
from kextract.errors import ValidationError

logger = logging.getLogger(__name__)

SLOT_NAMES = ("SENT", "HEAD", "TAIL", "TYPE_H", "TYPE_T", "MASK")

# virtual ids appended after the vocabulary: head-type then tail-type
TYPE_H_OFFSET = 0
TYPE_T_OFFSET = 1
NUM_VIRTUAL_TOKENS = 2

DEFAULT_TEMPLATE_TEXT = "{SENT} {TYPE_H} {HEAD} {MASK} {TYPE_T} {TAIL}"


@dataclass(frozen=True)
class PromptTemplate:
    slots: tuple[str, ...]

    def __post_init__(self):
        if sum(1 for s in self.slots if s == "MASK") != 1:
            raise ValidationError("template must contain exactly one {MASK} slot")
        if sum(1 for s in self.slots if s == "SENT") != 1:
            raise ValidationError("template must contain exactly one {SENT} slot")

    @classmethod
    def parse(cls, text: str) -> "PromptTemplate":
        slots = []
        for piece in text.split():
            if piece.startswith("{") and piece.endswith("}"):
                name = piece[1:-1]
                if name not in SLOT_NAMES:
                    raise ValidationError(f"unknown template slot {piece!r}")
                slots.append(name)
            else:
                slots.append(piece)
        return cls(tuple(slots))

    def __str__(self) -> str:
        return " ".join(f"{{{s}}}" if s in SLOT_NAMES else s for s in self.slots)


def default_template() -> PromptTemplate:
    return PromptTemplate.parse(DEFAULT_TEMPLATE_TEXT)


def build_relation_prompt(
    record: FewShotRelationRecord,
    template: PromptTemplate,
    vocab: Vocabulary,
) -> tuple[list[int], int]:
    """Substitute the template's slots for this record.

    Returns (token ids, mask position). The relation label never enters the
    prompt. Out-of-vocabulary mention tokens fall back to UNK with a warning.
    """
    ids: list[int] = []
    mask_position = -1

    def encode_checked(tokens, what):
        encoded = vocab.encode(tokens)
        if vocab.unk_id in encoded:
            logger.warning("%s %r not fully in vocabulary; using UNK", what, " ".join(tokens))
        return encoded

    for slot in template.slots:
        if slot == "SENT":
            ids.extend(encode_checked(record.tokens, "sentence"))
        elif slot == "HEAD":
            ids.extend(encode_checked(record.tokens[slice(*record.head_span)], "head"))
        elif slot == "TAIL":
            ids.extend(encode_checked(record.tokens[slice(*record.tail_span)], "tail"))
        elif slot == "TYPE_H":
            ids.append(len(vocab) + TYPE_H_OFFSET)
        elif slot == "TYPE_T":
            ids.append(len(vocab) + TYPE_T_OFFSET)
        elif slot == "MASK":
            mask_position = len(ids)
            ids.append(vocab.mask_id)
        else:
            ids.extend(encode_checked([slot], "literal"))
    return ids, mask_position
