"""Prefix fusion: visual features become extra attention keys and values.

Queries stay text-only; per layer, one learnable projection pair maps the
global feature and each (capped) object feature into key/value rows shared
across heads. With no visual input the prefix is empty and the math is
plain self-attention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from kextract.models.layers import attend
from kextract.multimodal.features import VisualFeatureBundle


@dataclass(frozen=True)
class FusionConfig:
    visual_dim: int
    depth: int
    head_dim: int
    max_objects: int = 3

    def __post_init__(self):
        if min(self.visual_dim, self.depth, self.head_dim) <= 0 or self.max_objects < 0:
            raise ValueError("bad fusion configuration")


class VisualProjector(nn.Module):
    """Per-layer key/value projections from d_v to the per-head dim."""

    def __init__(self, config: FusionConfig):
        super().__init__()
        self.config = config
        self.key_projs = nn.ModuleList(
            nn.Linear(config.visual_dim, config.head_dim) for _ in range(config.depth)
        )
        self.value_projs = nn.ModuleList(
            nn.Linear(config.visual_dim, config.head_dim) for _ in range(config.depth)
        )


def project_visual(
    bundle: VisualFeatureBundle,
    layer_index: int,
    projector: VisualProjector,
) -> tuple[torch.Tensor, torch.Tensor]:
    """((1+m) x d_k, (1+m) x d_v') prefixes for one layer: global feature in
    row 0, then the capped object features in file order."""
    config = projector.config
    if layer_index >= config.depth:
        raise ValueError(f"layer {layer_index} out of range for depth {config.depth}")
    if bundle.dim != config.visual_dim:
        raise ValueError(f"bundle dim {bundle.dim} != configured {config.visual_dim}")
    rows = torch.from_numpy(
        np.ascontiguousarray(bundle.rows(config.max_objects), dtype=np.float32)
    )
    weight = projector.key_projs[layer_index].weight
    rows = rows.to(weight.dtype)
    return projector.key_projs[layer_index](rows), projector.value_projs[layer_index](rows)


def batch_prefixes(
    bundles: list[VisualFeatureBundle | None],
    layer_index: int,
    projector: VisualProjector,
):
    """Stack per-example prefixes to a common length.

    Returns (prefix_k, prefix_v, prefix_mask) of shapes (B, L, d) and
    (B, L), or None when no example has any visual input.
    """
    if all(b is None for b in bundles):
        return None
    config = projector.config
    lengths = [
        0 if b is None else 1 + min(b.num_objects, config.max_objects) for b in bundles
    ]
    longest = max(lengths)
    head_dim = config.head_dim
    pk = torch.zeros(len(bundles), longest, head_dim)
    pv = torch.zeros(len(bundles), longest, head_dim)
    pmask = torch.zeros(len(bundles), longest)
    for i, bundle in enumerate(bundles):
        if bundle is None:
            continue
        k, v = project_visual(bundle, layer_index, projector)
        pk[i, : lengths[i]] = k
        pv[i, : lengths[i]] = v
        pmask[i, : lengths[i]] = 1.0
    return pk, pv, pmask


def fused_attention(
    queries: torch.Tensor,
    keys: torch.Tensor,
    values: torch.Tensor,
    num_heads: int,
    visual_prefix: tuple[torch.Tensor, torch.Tensor] | None = None,
    mask: torch.Tensor | None = None,
    prefix_mask: torch.Tensor | None = None,
    return_weights: bool = False,
):
    """Attention where every query sees text keys plus the visual prefix
    rows; softmax normalizes over all of them. The padding mask applies to
    text positions only. With an empty prefix this is standard attention."""
    prefix_k, prefix_v = visual_prefix if visual_prefix is not None else (None, None)
    return attend(
        queries,
        keys,
        values,
        num_heads,
        mask=mask,
        prefix_k=prefix_k,
        prefix_v=prefix_v,
        prefix_mask=prefix_mask,
        return_weights=return_weights,
    )
