"""Learnable virtual answer/type words and the synergistic training loss."""

from __future__ import annotations

import logging

import torch
from torch import nn

from kextract.dataio.vocab import Vocabulary
from kextract.models.spec import LabelSchema

logger = logging.getLogger(__name__)

DEFAULT_ROLES = ("head", "tail")


class VirtualTokenBank(nn.Module):
    """One learnable answer vector per relation plus role-typed type vectors."""

    def __init__(self, relations: tuple[str, ...], roles: tuple[str, ...], dim: int):
        super().__init__()
        self.relations = tuple(relations)
        self.roles = tuple(roles)
        self.answer_words = nn.Parameter(torch.zeros(len(relations), dim))
        self.type_words = nn.Parameter(torch.zeros(len(roles), dim))

    @property
    def dim(self) -> int:
        return self.answer_words.shape[1]

    def answer(self, relation: str) -> torch.Tensor:
        return self.answer_words[self.relations.index(relation)]

    def type_word(self, role: str) -> torch.Tensor:
        return self.type_words[self.roles.index(role)]


def init_virtual_answer_words(
    schema: LabelSchema,
    embedding: torch.Tensor,
    vocab: Vocabulary,
    roles: tuple[str, ...] = DEFAULT_ROLES,
    role_labels: dict[str, list[str]] | None = None,
) -> VirtualTokenBank:
    """Knowledge-informed initialization.

    Each answer vector is the mean of its label-name token embeddings; each
    type vector is the mean of the answer vectors of the labels carrying
    that role (every label, by default). ``embedding`` is the word-embedding
    table, (vocab, dim).
    """
    bank = VirtualTokenBank(schema.labels, roles, embedding.shape[1])
    with torch.no_grad():
        for i, label in enumerate(schema.labels):
            pieces = label.split()
            if not pieces:
                raise ValueError(f"label {i} has an empty name")
            ids = vocab.encode(pieces)
            if all(t == vocab.unk_id for t in ids):
                logger.warning("label %r has no in-vocabulary tokens; using UNK", label)
            bank.answer_words[i] = embedding[ids].mean(dim=0)
        for r, role in enumerate(roles):
            labels = (role_labels or {}).get(role, list(schema.labels))
            rows = [bank.answer_words[schema.index(l)] for l in labels]
            bank.type_words[r] = torch.stack(rows).mean(dim=0)
    return bank


def relation_logits(hidden: torch.Tensor, bank: VirtualTokenBank) -> torch.Tensor:
    if hidden.shape[-1] != bank.dim:
        raise ValueError(f"hidden dim {hidden.shape[-1]} != bank dim {bank.dim}")
    return hidden @ bank.answer_words.T


def score_relations(hidden: torch.Tensor, bank: VirtualTokenBank) -> torch.Tensor:
    """Softmax over relations of the mask-position hidden vector's dot
    products with the answer words."""
    return torch.softmax(relation_logits(hidden, bank), dim=-1)


def synergy_loss(
    classification_loss: torch.Tensor,
    bank: VirtualTokenBank,
    head_role: str,
    tail_role: str,
    relation: str,
    lam: float,
) -> torch.Tensor:
    """Classification loss plus a translation-style structural constraint:
    lam * || type(head) + answer(relation) - type(tail) ||^2."""
    if lam < 0:
        raise ValueError("lam must be >= 0")
    if lam == 0:
        return classification_loss
    residual = bank.type_word(head_role) + bank.answer(relation) - bank.type_word(tail_role)
    return classification_loss + lam * (residual * residual).sum()
