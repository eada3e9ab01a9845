"""Entity-pair relation matrix over a document's entity clusters."""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn


@dataclass
class EntityPairMatrix:
    """(N, N, C) pair features with the diagonal masked to zeros."""

    data: torch.Tensor

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[0] != self.data.shape[1]:
            raise ValueError(f"pair matrix must be (N, N, C), got {tuple(self.data.shape)}")
        if self.data.shape[0] < 2:
            raise ValueError("a pair matrix needs at least two entities")

    @property
    def num_entities(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


def mask_diagonal(data: torch.Tensor) -> torch.Tensor:
    n = data.shape[0]
    keep = 1.0 - torch.eye(n, dtype=data.dtype, device=data.device)
    return data * keep.unsqueeze(-1)


def pair_features(
    embeddings: torch.Tensor, context: torch.Tensor | None = None
) -> torch.Tensor:
    """Pre-projection cell features [e_i, e_j, e_i * e_j (, context(i, j))]."""
    n, d = embeddings.shape
    left = embeddings.unsqueeze(1).expand(n, n, d)
    right = embeddings.unsqueeze(0).expand(n, n, d)
    parts = [left, right, left * right]
    if context is not None:
        if context.shape[:2] != (n, n):
            raise ValueError(f"context must be (N, N, *), got {tuple(context.shape)}")
        parts.append(context)
    return torch.cat(parts, dim=-1)


def build_pair_matrix(
    embeddings: torch.Tensor,
    projection: nn.Module,
    context: torch.Tensor | None = None,
) -> EntityPairMatrix:
    """Project cell features into C channels and mask the diagonal."""
    if embeddings.shape[0] < 2:
        raise ValueError("no entity pairs exist with fewer than two entities")
    cells = projection(pair_features(embeddings, context))
    return EntityPairMatrix(mask_diagonal(cells))
