"""Entity pooling over mention representations."""

from __future__ import annotations

import torch


def pool_entity(mentions: torch.Tensor) -> torch.Tensor:
    """Componentwise logsumexp over a (m, d) stack of mention vectors.

    Order-invariant; a single mention pools to itself exactly.
    """
    if mentions.ndim != 2 or mentions.shape[0] == 0:
        raise ValueError("pool_entity needs at least one mention vector")
    if mentions.shape[0] == 1:
        return mentions[0]
    return torch.logsumexp(mentions, dim=0)
