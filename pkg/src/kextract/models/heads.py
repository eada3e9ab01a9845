"""Task heads: label distributions and transition-constrained tag decoding."""

from __future__ import annotations

import torch
from torch import nn

from kextract.models.capsule import margin_loss
from kextract.models.spec import LabelSchema


def legal_bio_transition(prev: str | None, current: str) -> bool:
    """prev=None means sentence start."""
    if not current.startswith("I-"):
        return True
    etype = current.split("-", 1)[1]
    return prev is not None and prev in (f"B-{etype}", f"I-{etype}")


def transition_mask(tags: tuple[str, ...]) -> torch.Tensor:
    """(T+1, T) boolean, entry [p, c] = prev tag p (row T = start) may precede c."""
    t = len(tags)
    allowed = torch.zeros(t + 1, t, dtype=torch.bool)
    for c, cur in enumerate(tags):
        for p, prev in enumerate(tags):
            allowed[p, c] = legal_bio_transition(prev, cur)
        allowed[t, c] = legal_bio_transition(None, cur)
    return allowed


def constrained_decode(logits: torch.Tensor, tags: tuple[str, ...]) -> list[str]:
    """Best legal tag sequence by total logit, via dynamic programming.

    logits: (n, T). Exact: equals exhaustive search over all legal
    sequences. Ties break toward the lower tag index.
    """
    n, t = logits.shape
    if n == 0:
        return []
    allowed = transition_mask(tags)
    neg = torch.finfo(logits.dtype).min / 4
    start = torch.where(allowed[t], logits[0], torch.full_like(logits[0], neg))
    score = start
    back = torch.zeros(n, t, dtype=torch.long)
    for i in range(1, n):
        # candidate[p, c]: best score ending at i with tag c coming from p
        candidate = score.unsqueeze(1) + logits[i].unsqueeze(0)
        candidate = torch.where(allowed[:t], candidate, torch.full_like(candidate, neg))
        score, back[i] = candidate.max(dim=0)
    best = int(score.argmax())
    path = [best]
    for i in range(n - 1, 0, -1):
        path.append(int(back[i, path[-1]]))
    return [tags[i] for i in reversed(path)]


class ClassificationHead(nn.Module):
    """Linear + softmax over schema labels from the pooled vector."""

    def __init__(self, hidden_dim: int, num_labels: int):
        super().__init__()
        self.proj = nn.Linear(hidden_dim, num_labels)

    def logits(self, pooled: torch.Tensor) -> torch.Tensor:
        return self.proj(pooled)

    def forward(self, pooled: torch.Tensor) -> torch.Tensor:
        return torch.softmax(self.logits(pooled), dim=-1)

    def loss(self, pooled: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
        return nn.functional.cross_entropy(self.logits(pooled), target)


class CapsuleLengthHead(nn.Module):
    """Scores classes by relation-capsule length; trains with margin loss."""

    def __init__(self, num_capsules: int, capsule_dim: int):
        super().__init__()
        self.num_capsules = num_capsules
        self.capsule_dim = capsule_dim

    def lengths(self, pooled: torch.Tensor) -> torch.Tensor:
        v = pooled.view(-1, self.num_capsules, self.capsule_dim)
        return torch.sqrt((v * v).sum(dim=-1).clamp_min(1e-12))

    def logits(self, pooled: torch.Tensor) -> torch.Tensor:
        return self.lengths(pooled)

    def forward(self, pooled: torch.Tensor) -> torch.Tensor:
        return torch.softmax(self.lengths(pooled), dim=-1)

    def loss(self, pooled: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
        return margin_loss(self.lengths(pooled), target)


class TaggingHead(nn.Module):
    """Per-token softmax over BIO tags plus exact constrained decoding."""

    def __init__(self, hidden_dim: int, tags: tuple[str, ...]):
        super().__init__()
        self.tags = tags
        self.proj = nn.Linear(hidden_dim, len(tags))

    def logits(self, features: torch.Tensor) -> torch.Tensor:
        return self.proj(features)

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        return torch.softmax(self.logits(features), dim=-1)

    def loss(
        self, features: torch.Tensor, target: torch.Tensor, mask: torch.Tensor
    ) -> torch.Tensor:
        logits = self.logits(features)
        raw = nn.functional.cross_entropy(
            logits.reshape(-1, len(self.tags)), target.reshape(-1), reduction="none"
        )
        m = mask.reshape(-1).to(raw.dtype)
        return (raw * m).sum() / m.sum().clamp_min(1.0)

    def decode(self, features: torch.Tensor, lengths: list[int]) -> list[list[str]]:
        logits = self.logits(features)
        return [
            constrained_decode(logits[b, : lengths[b]], self.tags)
            for b in range(features.shape[0])
        ]


def apply_head(task: str, head: nn.Module, features: torch.Tensor, schema: LabelSchema):
    """Label distribution(s) for the task: (B, L) for re/ae, (B, n, T) for ner."""
    if schema.task != task:
        raise ValueError(f"schema task {schema.task!r} does not match {task!r}")
    out = head(features)
    expected = len(schema)
    if out.shape[-1] != expected:
        raise ValueError(f"head produced {out.shape[-1]} labels, schema has {expected}")
    return out
