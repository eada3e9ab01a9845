"""Sentence encoders: CNN, attention-RNN, transformer, GCN and capsule.

Every encoder maps (B, n, d_in) token features plus a (B, n) mask to
per-token features (B, n, hidden_dim) and a pooled sentence vector
(B, hidden_dim). Padding positions never influence either output; inputs
are zeroed at padding before any mixing so appended PAD columns are inert.
"""

from __future__ import annotations

import torch
from torch import nn

from kextract.errors import ConfigError
from kextract.models.capsule import capsule_squash, dynamic_routing
from kextract.models.graph import graph_convolve
from kextract.models.layers import NEG_INF, TransformerLayer, sinusoidal_positions
from kextract.models.spec import EncoderSpec


def _apply_mask(x: torch.Tensor, mask: torch.Tensor | None) -> torch.Tensor:
    if mask is None:
        return x
    return x * mask.to(x.dtype).unsqueeze(-1)


def _masked_mean(x: torch.Tensor, mask: torch.Tensor | None) -> torch.Tensor:
    if mask is None:
        return x.mean(dim=1)
    m = mask.to(x.dtype).unsqueeze(-1)
    total = (x * m).sum(dim=1)
    count = m.sum(dim=1).clamp_min(1.0)
    return total / count


class CnnEncoder(nn.Module):
    """Parallel convolutions of several widths with max-over-time pooling."""

    def __init__(self, input_dim: int, hidden_dim: int, kernel_widths: tuple[int, ...]):
        super().__init__()
        channels = hidden_dim // len(kernel_widths)
        self.convs = nn.ModuleList(
            nn.Conv1d(input_dim, channels, width, padding=width // 2)
            for width in kernel_widths
        )
        self.widths = kernel_widths

    def forward(self, x, mask=None):
        x = _apply_mask(x, mask)
        moved = x.transpose(1, 2)  # B, d, n
        outs = []
        for conv, width in zip(self.convs, self.widths):
            out = conv(moved)
            if width % 2 == 0:  # even kernels overshoot by one with width//2 padding
                out = out[:, :, : moved.shape[2]]
            outs.append(out)
        features = torch.relu(torch.cat(outs, dim=1)).transpose(1, 2)  # B, n, h
        if mask is not None:
            pool_in = features + (1.0 - mask.to(x.dtype)).unsqueeze(-1) * NEG_INF
        else:
            pool_in = features
        pooled = pool_in.max(dim=1).values
        if mask is not None:  # all-PAD rows would otherwise pool the NEG_INF filler
            empty = mask.sum(dim=1) == 0
            pooled = torch.where(empty.unsqueeze(-1), torch.zeros_like(pooled), pooled)
        return _apply_mask(features, mask), pooled


class RnnAttentionEncoder(nn.Module):
    """Bidirectional GRU with multiplicative word attention for pooling."""

    def __init__(self, input_dim: int, hidden_dim: int):
        super().__init__()
        if hidden_dim % 2 != 0:
            raise ValueError("rnn hidden_dim must be even")
        self.half = hidden_dim // 2
        self.fwd = nn.GRUCell(input_dim, self.half)
        self.bwd = nn.GRUCell(input_dim, self.half)
        self.att_proj = nn.Linear(hidden_dim, hidden_dim)
        self.att_vector = nn.Linear(hidden_dim, 1, bias=False)

    def _run(self, cell, x, mask, reverse: bool):
        batch, n, _ = x.shape
        h = x.new_zeros(batch, self.half)
        steps = range(n - 1, -1, -1) if reverse else range(n)
        out = x.new_zeros(batch, n, self.half)
        for t in steps:
            new_h = cell(x[:, t], h)
            if mask is not None:
                keep = mask[:, t].to(x.dtype).unsqueeze(-1)
                h = keep * new_h + (1.0 - keep) * h
            else:
                h = new_h
            out[:, t] = h
        return out

    def forward(self, x, mask=None, return_attention=False):
        x = _apply_mask(x, mask)
        states = torch.cat(
            [self._run(self.fwd, x, mask, False), self._run(self.bwd, x, mask, True)],
            dim=-1,
        )
        scores = self.att_vector(torch.tanh(self.att_proj(states))).squeeze(-1)
        if mask is not None:
            scores = scores + (1.0 - mask.to(x.dtype)) * NEG_INF
        weights = torch.softmax(scores, dim=1)
        pooled = (weights.unsqueeze(-1) * states).sum(dim=1)
        if mask is not None:
            empty = mask.sum(dim=1) == 0
            pooled = torch.where(empty.unsqueeze(-1), torch.zeros_like(pooled), pooled)
        states = _apply_mask(states, mask)
        if return_attention:
            return states, pooled, weights
        return states, pooled


class TransformerTextEncoder(nn.Module):
    """Self-attention stack pooled at an internal first-position token.

    Optional per-layer key/value prefixes (visual fusion, prompt guidance)
    are passed at call time as [(prefix_k, prefix_v), ...] per layer.
    """

    def __init__(
        self,
        input_dim: int,
        hidden_dim: int,
        depth: int,
        num_heads: int,
        ff_dim: int | None = None,
        max_len: int = 512,
    ):
        super().__init__()
        self.input_proj = nn.Linear(input_dim, hidden_dim)
        self.pool_token = nn.Parameter(torch.zeros(hidden_dim))
        self.layers = nn.ModuleList(
            TransformerLayer(hidden_dim, num_heads, ff_dim) for _ in range(depth)
        )
        self.register_buffer(
            "positions", sinusoidal_positions(max_len, hidden_dim), persistent=False
        )

    def forward(self, x, mask=None, prefixes=None, return_attention=False):
        batch, n, _ = x.shape
        x = _apply_mask(x, mask)
        # pool slot owns position 0; token i uses position i+1 so appending
        # padding never shifts any real position
        h = self.input_proj(x) + self.positions[1 : n + 1].to(x.dtype)
        h = _apply_mask(h, mask)
        pool = (self.pool_token + self.positions[0].to(x.dtype)).expand(batch, 1, -1)
        h = torch.cat([pool, h], dim=1)
        full_mask = None
        if mask is not None:
            ones = torch.ones(batch, 1, dtype=mask.dtype, device=mask.device)
            full_mask = torch.cat([ones, mask], dim=1)
        attentions = []
        for i, layer in enumerate(self.layers):
            prefix = prefixes[i] if prefixes is not None else None
            if return_attention:
                h, w = layer(h, full_mask, prefix, return_weights=True)
                attentions.append(w)
            else:
                h = layer(h, full_mask, prefix)
        features = _apply_mask(h[:, 1:], mask)
        pooled = h[:, 0]
        if return_attention:
            return features, pooled, attentions
        return features, pooled


class GcnEncoder(nn.Module):
    """Stack of degree-normalized graph convolutions with masked mean pooling."""

    def __init__(self, input_dim: int, hidden_dim: int, depth: int):
        super().__init__()
        dims = [input_dim] + [hidden_dim] * depth
        self.rounds = nn.ModuleList(
            nn.Linear(dims[i], dims[i + 1]) for i in range(depth)
        )

    def forward(self, x, mask=None, adjacency=None):
        if adjacency is None:
            raise ConfigError("gcn encoder requires an adjacency matrix")
        h = _apply_mask(x, mask)
        for linear in self.rounds:
            h = graph_convolve(h, adjacency, linear.weight.T, linear.bias)
            h = _apply_mask(h, mask)
        return h, _masked_mean(h, mask)


class CapsuleEncoder(nn.Module):
    """Convolutional primary capsules routed to relation capsules.

    A width-3 convolution produces the per-token features; each position
    yields several primary capsules whose predictions are routed by
    agreement. The pooled vector is the concatenation of the
    relation-capsule outputs; ``capsule_lengths`` of it feed the
    margin-loss head.
    """

    PRIMARY_CHANNELS = 4

    def __init__(
        self,
        input_dim: int,
        hidden_dim: int,
        num_capsules: int,
        capsule_dim: int,
        routing_iterations: int,
    ):
        super().__init__()
        if hidden_dim != num_capsules * capsule_dim:
            raise ValueError("hidden_dim must equal num_capsules * capsule_dim")
        self.num_capsules = num_capsules
        self.capsule_dim = capsule_dim
        self.iterations = routing_iterations
        self.conv = nn.Conv1d(input_dim, hidden_dim, 3, padding=1)
        self.primary = nn.Linear(hidden_dim, self.PRIMARY_CHANNELS * capsule_dim)
        self.predictions = nn.Parameter(
            torch.zeros(self.PRIMARY_CHANNELS, capsule_dim, num_capsules * capsule_dim)
        )

    def forward(self, x, mask=None):
        x = _apply_mask(x, mask)
        batch, n, _ = x.shape
        features = torch.relu(self.conv(x.transpose(1, 2)).transpose(1, 2))
        features = _apply_mask(features, mask)
        primary = capsule_squash(
            self.primary(features).view(batch, n, self.PRIMARY_CHANNELS, self.capsule_dim)
        )
        u_hat = torch.einsum("bncp,cpq->bncq", primary, self.predictions).view(
            batch, n, self.PRIMARY_CHANNELS, self.num_capsules, self.capsule_dim
        )
        if mask is not None:
            u_hat = u_hat * mask.view(batch, n, 1, 1, 1).to(x.dtype)
        u_hat = u_hat.reshape(
            batch, n * self.PRIMARY_CHANNELS, self.num_capsules, self.capsule_dim
        )
        v = dynamic_routing(u_hat, self.iterations)
        pooled = v.flatten(1)
        return features, pooled

    def capsule_lengths(self, pooled: torch.Tensor) -> torch.Tensor:
        v = pooled.view(-1, self.num_capsules, self.capsule_dim)
        return torch.sqrt((v * v).sum(dim=-1).clamp_min(1e-12))


class PretrainedAdapter(nn.Module):
    """Seam for an injected external encoder satisfying the encode contract.

    ``encode_fn(x, mask) -> (features, pooled)`` supplies the representation;
    a linear head maps it onto ``hidden_dim``.
    """

    def __init__(self, encode_fn, external_dim: int, hidden_dim: int):
        super().__init__()
        self.encode_fn = encode_fn
        self.feature_proj = nn.Linear(external_dim, hidden_dim)
        self.pooled_proj = nn.Linear(external_dim, hidden_dim)

    def forward(self, x, mask=None):
        features, pooled = self.encode_fn(x, mask)
        return self.feature_proj(features), self.pooled_proj(pooled)


def build_encoder(spec: EncoderSpec, input_dim: int, encode_fn=None) -> nn.Module:
    """Construct the encoder module described by ``spec``."""
    if spec.kind == "cnn":
        return CnnEncoder(input_dim, spec.hidden_dim, spec.kernel_widths)
    if spec.kind == "rnn":
        return RnnAttentionEncoder(input_dim, spec.hidden_dim)
    if spec.kind == "transformer":
        return TransformerTextEncoder(
            input_dim, spec.hidden_dim, spec.depth, spec.num_heads, spec.ff_dim
        )
    if spec.kind == "gcn":
        return GcnEncoder(input_dim, spec.hidden_dim, spec.depth)
    if spec.kind == "capsule":
        return CapsuleEncoder(
            input_dim,
            spec.hidden_dim,
            spec.num_capsules,
            spec.capsule_dim,
            spec.routing_iterations,
        )
    if spec.kind == "pretrained-adapter":
        if encode_fn is None:
            raise ValueError("pretrained-adapter requires an injected encode_fn")
        return PretrainedAdapter(encode_fn, input_dim, spec.hidden_dim)
    raise ValueError(f"unknown encoder kind {spec.kind!r}")


def encode(
    encoder: nn.Module,
    x: torch.Tensor,
    mask: torch.Tensor | None = None,
    adjacency: torch.Tensor | None = None,
):
    """Uniform calling convention over all encoder kinds."""
    if isinstance(encoder, GcnEncoder):
        return encoder(x, mask, adjacency)
    return encoder(x, mask)
