"""Capsule primitives: squash nonlinearity and routing by agreement."""

from __future__ import annotations

import torch


def capsule_squash(s: torch.Tensor, dim: int = -1, eps: float = 1e-12) -> torch.Tensor:
    """v = (|s|^2 / (1 + |s|^2)) * s/|s| along ``dim``; zero maps to zero."""
    squared = (s * s).sum(dim=dim, keepdim=True)
    norm = torch.sqrt(squared.clamp_min(eps))
    scale = torch.where(
        squared > 0, squared / (1.0 + squared) / norm, torch.zeros_like(norm)
    )
    return scale * s


def dynamic_routing(
    u_hat: torch.Tensor, iterations: int = 3, return_couplings: bool = False
):
    """Routing by agreement over prediction vectors.

    u_hat: (..., num_in, num_out, dim). Logits start at zero, couplings are a
    softmax over output capsules per input capsule, and each round updates
    logits by the agreement <u_hat, v>. Returns v of shape
    (..., num_out, dim), plus the final couplings when asked.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    logits = torch.zeros(u_hat.shape[:-1], dtype=u_hat.dtype, device=u_hat.device)
    couplings = torch.softmax(logits, dim=-1)
    v = None
    for step in range(iterations):
        couplings = torch.softmax(logits, dim=-1)
        s = (couplings.unsqueeze(-1) * u_hat).sum(dim=-3)
        v = capsule_squash(s)
        if step + 1 < iterations:
            agreement = (u_hat * v.unsqueeze(-3)).sum(dim=-1)
            logits = logits + agreement
    if return_couplings:
        return v, couplings
    return v


def margin_loss(
    lengths: torch.Tensor,
    target: torch.Tensor,
    m_pos: float = 0.9,
    m_neg: float = 0.1,
    lam: float = 0.5,
) -> torch.Tensor:
    """Per-class margin loss on capsule lengths; ``target`` holds class indices."""
    one_hot = torch.zeros_like(lengths)
    one_hot.scatter_(-1, target.unsqueeze(-1), 1.0)
    positive = one_hot * torch.clamp(m_pos - lengths, min=0) ** 2
    negative = lam * (1.0 - one_hot) * torch.clamp(lengths - m_neg, min=0) ** 2
    return (positive + negative).sum(dim=-1).mean()
