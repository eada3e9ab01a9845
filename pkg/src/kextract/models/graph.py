"""Graph convolution over token graphs."""

from __future__ import annotations

import torch


def graph_convolve(
    features: torch.Tensor,
    adjacency: torch.Tensor,
    weight: torch.Tensor,
    bias: torch.Tensor | None = None,
    activation=torch.tanh,
) -> torch.Tensor:
    """One propagation round: activation(D^-1 (A + I) X W + b).

    features (..., n, d), adjacency (..., n, n) non-negative, weight (d, d').
    Self-loops are added internally; rows are normalized by their degree.
    """
    if features.shape[-2] != adjacency.shape[-1] or adjacency.shape[-2] != adjacency.shape[-1]:
        raise ValueError(
            f"adjacency {tuple(adjacency.shape)} incompatible with features {tuple(features.shape)}"
        )
    if features.shape[-1] != weight.shape[0]:
        raise ValueError(
            f"features dim {features.shape[-1]} incompatible with weight {tuple(weight.shape)}"
        )
    if (adjacency < 0).any():
        raise ValueError("adjacency must be non-negative")
    n = adjacency.shape[-1]
    eye = torch.eye(n, dtype=features.dtype, device=features.device)
    a_tilde = adjacency.to(features.dtype) + eye
    degree = a_tilde.sum(dim=-1, keepdim=True)
    propagated = torch.matmul(a_tilde / degree, features)
    out = torch.matmul(propagated, weight)
    if bias is not None:
        out = out + bias
    return activation(out)


def chain_adjacency(lengths: torch.Tensor, max_len: int) -> torch.Tensor:
    """Default token graph: undirected edges i <-> i+1 within each sentence.

    lengths: (B,) true lengths. Returns (B, max_len, max_len) with no edges
    touching padding.
    """
    batch = lengths.shape[0]
    adj = torch.zeros(batch, max_len, max_len)
    for b in range(batch):
        n = int(lengths[b])
        for i in range(n - 1):
            adj[b, i, i + 1] = 1.0
            adj[b, i + 1, i] = 1.0
    return adj
