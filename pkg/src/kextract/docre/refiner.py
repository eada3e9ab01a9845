"""U-shaped convolutional refiner over the entity-pair matrix.

Two smooth (GELU + average-pool) down levels, a bottleneck, two up levels
with skip connections, plus a 1x1 residual path from the input: with all
conv weights zero the refiner reduces to a channel projection of its input.
"""

from __future__ import annotations

import torch
from torch import nn

from kextract.docre.pair_matrix import EntityPairMatrix, mask_diagonal


def _conv(c_in: int, c_out: int) -> nn.Conv2d:
    return nn.Conv2d(c_in, c_out, kernel_size=3, padding=1)


class UNetRefiner(nn.Module):
    def __init__(self, channels_in: int, channels_out: int, base: int = 16):
        super().__init__()
        self.down1 = _conv(channels_in, base)
        self.down2 = _conv(base, 2 * base)
        self.bottleneck = _conv(2 * base, 2 * base)
        self.up1 = _conv(4 * base, base)
        self.up2 = _conv(2 * base, channels_out)
        self.skip_proj = nn.Conv2d(channels_in, channels_out, kernel_size=1)
        self.pool = nn.AvgPool2d(2)
        self.act = nn.GELU()

    def forward(self, image: torch.Tensor) -> torch.Tensor:
        """image: (B, C, H, W) with H, W multiples of 4."""
        d1 = self.act(self.down1(image))
        d2 = self.act(self.down2(self.pool(d1)))
        mid = self.act(self.bottleneck(self.pool(d2)))
        u1 = nn.functional.interpolate(mid, scale_factor=2, mode="nearest")
        u1 = self.act(self.up1(torch.cat([u1, d2], dim=1)))
        u2 = nn.functional.interpolate(u1, scale_factor=2, mode="nearest")
        u2 = self.up2(torch.cat([u2, d1], dim=1))
        return u2 + self.skip_proj(image)


def unet_refine(matrix: EntityPairMatrix, refiner: UNetRefiner) -> EntityPairMatrix:
    """Refine an (N, N, C) matrix, padding N to a multiple of 4 for the two
    pooling levels and cropping back; the diagonal is re-masked."""
    n = matrix.num_entities
    padded = (n + 3) // 4 * 4
    image = matrix.data.permute(2, 0, 1).unsqueeze(0)
    if padded != n:
        image = nn.functional.pad(image, (0, padded - n, 0, padded - n))
    out = refiner(image)[0, :, :n, :n].permute(1, 2, 0)
    return EntityPairMatrix(mask_diagonal(out))
