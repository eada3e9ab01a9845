"""Multi-head attention and transformer layers.

All attention here supports optional key/value prefix rows: extra
(batch, m, head_dim) tensors attended to by every query but never querying
themselves. Visual fusion and prompt-guided attention both ride on this
mechanism; with no prefix the math reduces to standard self-attention.
"""

from __future__ import annotations

import math

import torch
from torch import nn

NEG_INF = -1e30


def attend(
    q: torch.Tensor,
    k: torch.Tensor,
    v: torch.Tensor,
    num_heads: int,
    mask: torch.Tensor | None = None,
    prefix_k: torch.Tensor | None = None,
    prefix_v: torch.Tensor | None = None,
    prefix_mask: torch.Tensor | None = None,
    return_weights: bool = False,
):
    """Scaled dot-product attention over text keys plus optional prefix rows.

    q/k/v: (B, n, d) with d divisible by num_heads. mask: (B, n) with 1 for
    real text positions; it never hides prefix rows. prefix_k/prefix_v:
    (B or 1, m, head_dim), shared across heads; ``prefix_mask`` (B, m) hides
    per-example padding rows when prefixes are batched to a common length.
    Returns (B, n, d) outputs and, when asked, the (B, heads, n, m + n)
    attention weights.
    """
    batch, n, dim = q.shape
    head_dim = dim // num_heads
    scale = 1.0 / math.sqrt(head_dim)

    def split(x):
        return x.view(batch, -1, num_heads, head_dim).transpose(1, 2)  # B,h,n,hd

    qh, kh, vh = split(q), split(k), split(v)
    m = 0
    if prefix_k is not None and prefix_k.shape[-2] > 0:
        m = prefix_k.shape[-2]
        pk = prefix_k.to(q.dtype).expand(batch, m, head_dim)
        pv = prefix_v.to(q.dtype).expand(batch, m, head_dim)
        kh = torch.cat([pk.unsqueeze(1).expand(batch, num_heads, m, head_dim), kh], dim=2)
        vh = torch.cat([pv.unsqueeze(1).expand(batch, num_heads, m, head_dim), vh], dim=2)

    scores = torch.matmul(qh, kh.transpose(-2, -1)) * scale  # B,h,n,m+n
    if mask is not None or (m and prefix_mask is not None):
        text_mask = (
            mask.to(q.dtype)
            if mask is not None
            else torch.ones(batch, n, dtype=q.dtype, device=q.device)
        )
        if m:
            front = (
                prefix_mask.to(q.dtype)
                if prefix_mask is not None
                else torch.ones(batch, m, dtype=q.dtype, device=q.device)
            )
            key_mask = torch.cat([front, text_mask], dim=1)
        else:
            key_mask = text_mask
        scores = scores + (1.0 - key_mask).view(batch, 1, 1, -1) * NEG_INF
    weights = torch.softmax(scores, dim=-1)
    out = torch.matmul(weights, vh).transpose(1, 2).reshape(batch, n, dim)
    if return_weights:
        return out, weights
    return out


class MultiHeadSelfAttention(nn.Module):
    def __init__(self, dim: int, num_heads: int):
        super().__init__()
        if dim % num_heads != 0:
            raise ValueError("dim must be divisible by num_heads")
        self.num_heads = num_heads
        self.q_proj = nn.Linear(dim, dim)
        self.k_proj = nn.Linear(dim, dim)
        self.v_proj = nn.Linear(dim, dim)
        self.out_proj = nn.Linear(dim, dim)

    def forward(self, x, mask=None, prefix=None, return_weights=False):
        prefix_k = prefix_v = prefix_mask = None
        if prefix is not None:
            prefix_k, prefix_v, *rest = prefix
            prefix_mask = rest[0] if rest else None
        result = attend(
            self.q_proj(x),
            self.k_proj(x),
            self.v_proj(x),
            self.num_heads,
            mask=mask,
            prefix_k=prefix_k,
            prefix_v=prefix_v,
            prefix_mask=prefix_mask,
            return_weights=return_weights,
        )
        if return_weights:
            out, weights = result
            return self.out_proj(out), weights
        return self.out_proj(result)


class TransformerLayer(nn.Module):
    """Post-norm transformer block: attention and GELU feed-forward."""

    def __init__(self, dim: int, num_heads: int, ff_dim: int | None = None):
        super().__init__()
        ff_dim = ff_dim or 2 * dim
        self.attention = MultiHeadSelfAttention(dim, num_heads)
        self.norm1 = nn.LayerNorm(dim)
        self.ff = nn.Sequential(nn.Linear(dim, ff_dim), nn.GELU(), nn.Linear(ff_dim, dim))
        self.norm2 = nn.LayerNorm(dim)

    def forward(self, x, mask=None, prefix=None, return_weights=False):
        if return_weights:
            attn, weights = self.attention(x, mask, prefix, return_weights=True)
        else:
            attn, weights = self.attention(x, mask, prefix), None
        x = self.norm1(x + attn)
        x = self.norm2(x + self.ff(x))
        if return_weights:
            return x, weights
        return x


def sinusoidal_positions(n: int, dim: int, dtype=torch.float32) -> torch.Tensor:
    """Fixed sin/cos position encodings, (n, dim)."""
    position = torch.arange(n, dtype=dtype).unsqueeze(1)
    half = torch.arange(0, dim, 2, dtype=dtype)
    freq = torch.exp(-math.log(10000.0) * half / dim)
    enc = torch.zeros(n, dim, dtype=dtype)
    enc[:, 0::2] = torch.sin(position * freq)
    enc[:, 1::2] = torch.cos(position * freq)[:, : dim // 2]
    return enc
