"""Adaptive-threshold multi-label classification of entity pairs.

Each cell scores every relation plus a learned threshold pseudo-label;
a relation is predicted exactly when its logit exceeds the cell's
threshold logit. Training ranks positives above the threshold and the
threshold above negatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from kextract.docre.pair_matrix import EntityPairMatrix
from kextract.models.spec import THRESHOLD_LABEL, LabelSchema


@dataclass(frozen=True)
class PairCell:
    relations: frozenset[str]
    scores: dict[str, float]
    threshold: float


@dataclass(frozen=True)
class PairPrediction:
    """Per ordered entity pair (head != tail): predicted relation set and scores."""

    cells: dict[tuple[int, int], PairCell]

    def triples(self) -> list[tuple[int, int, str, float]]:
        out = []
        for (i, j), cell in sorted(self.cells.items()):
            for rel in sorted(cell.relations):
                out.append((i, j, rel, cell.scores[rel] - cell.threshold))
        return out


def relation_labels(schema: LabelSchema) -> tuple[str, ...]:
    if THRESHOLD_LABEL not in schema.labels:
        raise ValueError("schema must include the reserved threshold pseudo-label")
    return tuple(l for l in schema.labels if l != THRESHOLD_LABEL)


def classify_pairs(
    matrix: EntityPairMatrix, head: nn.Module, schema: LabelSchema
) -> PairPrediction:
    """Apply the per-cell scoring head; relations beating the threshold
    logit form the (possibly empty) predicted set of each off-diagonal cell."""
    labels = relation_labels(schema)
    th_index = schema.labels.index(THRESHOLD_LABEL)
    rel_indices = [schema.labels.index(l) for l in labels]
    logits = head(matrix.data).detach()  # (N, N, R+1)
    n = matrix.num_entities
    cells = {}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            cell_logits = logits[i, j]
            threshold = float(cell_logits[th_index])
            scores = {l: float(cell_logits[k]) for l, k in zip(labels, rel_indices)}
            chosen = frozenset(l for l in labels if scores[l] > threshold)
            cells[(i, j)] = PairCell(chosen, scores, threshold)
    return PairPrediction(cells)


def adaptive_threshold_loss(
    logits: torch.Tensor, positives: torch.Tensor, th_index: int
) -> torch.Tensor:
    """Ranking loss for (cells, R+1) logits against (cells, R+1) 0/1 positives
    (the threshold column must be zero).

    Positives compete with the threshold in one softmax; the threshold must
    win the softmax over the negatives in another.
    """
    th_mask = torch.zeros_like(logits, dtype=torch.bool)
    th_mask[..., th_index] = True
    pos_mask = positives.bool() & ~th_mask

    neg_inf = torch.finfo(logits.dtype).min / 4
    # positives vs threshold
    pos_logits = torch.where(pos_mask | th_mask, logits, torch.full_like(logits, neg_inf))
    pos_log_probs = torch.log_softmax(pos_logits, dim=-1)
    loss_pos = -(pos_log_probs * pos_mask.to(logits.dtype)).sum(dim=-1)
    # threshold vs negatives
    neg_logits = torch.where(pos_mask, torch.full_like(logits, neg_inf), logits)
    neg_log_probs = torch.log_softmax(neg_logits, dim=-1)
    loss_neg = -neg_log_probs[..., th_index]
    return (loss_pos + loss_neg).mean()
