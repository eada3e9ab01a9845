"""Word embeddings with relative head/tail position features.

Sentence-classification inputs concatenate each token's word embedding with
embeddings of its clipped relative distance to the head and tail mentions.
"""

from __future__ import annotations

import torch
from torch import nn

from kextract.dataio.records import AttributeRecord, RelationRecord
from kextract.dataio.tokenizer import align_offset, tokenize
from kextract.dataio.vocab import Vocabulary
from kextract.models.spec import EncoderSpec


class PositionalWordEmbedder(nn.Module):
    """Token ids (B, n) -> features (B, n, embedding_dim + 2*position_dim)."""

    def __init__(
        self,
        vocab_size: int,
        embedding_dim: int,
        position_dim: int = 0,
        max_distance: int = 30,
    ):
        super().__init__()
        self.max_distance = max_distance
        self.position_dim = position_dim
        self.word = nn.Embedding(vocab_size, embedding_dim, padding_idx=0)
        if position_dim > 0:
            table = 2 * max_distance + 1
            self.head_distance = nn.Embedding(table, position_dim)
            self.tail_distance = nn.Embedding(table, position_dim)

    @property
    def output_dim(self) -> int:
        return self.word.embedding_dim + 2 * self.position_dim

    def _distance_ids(self, n: int, anchor: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(n, device=anchor.device).unsqueeze(0)
        delta = positions - anchor.unsqueeze(1)
        return delta.clamp(-self.max_distance, self.max_distance) + self.max_distance

    def forward(
        self,
        ids: torch.Tensor,
        head_index: torch.Tensor | None = None,
        tail_index: torch.Tensor | None = None,
    ) -> torch.Tensor:
        parts = [self.word(ids)]
        if self.position_dim > 0:
            if head_index is None or tail_index is None:
                raise ValueError("head/tail indices required when position features are enabled")
            n = ids.shape[1]
            parts.append(self.head_distance(self._distance_ids(n, head_index)))
            parts.append(self.tail_distance(self._distance_ids(n, tail_index)))
        return torch.cat(parts, dim=-1)


def resolve_mention_tokens(
    record: RelationRecord | AttributeRecord,
    language: str = "english",
    mode: str = "strict",
) -> tuple[list[str], int, int]:
    """Tokenize a record's sentence and map its two mention offsets to token indices."""
    if isinstance(record, RelationRecord):
        head_off, tail_off = record.head_offset, record.tail_offset
    else:
        head_off, tail_off = record.entity_offset, record.attribute_value_offset
    tokens = tokenize(record.sentence, language)
    head = align_offset(record.sentence, tokens, head_off, mode=mode)
    tail = align_offset(record.sentence, tokens, tail_off, mode=mode)
    return [t.text for t in tokens], head, tail


def embed_with_positions(
    embedder: PositionalWordEmbedder,
    vocab: Vocabulary,
    tokens: list[str],
    head_index: int,
    tail_index: int,
) -> torch.Tensor:
    """Single-sentence convenience form; returns (n, emb + 2*pos)."""
    ids = torch.tensor([vocab.encode(tokens)], dtype=torch.long)
    out = embedder(
        ids,
        head_index=torch.tensor([head_index]),
        tail_index=torch.tensor([tail_index]),
    )
    return out[0]


def embedder_from_spec(spec: EncoderSpec, vocab_size: int) -> PositionalWordEmbedder:
    return PositionalWordEmbedder(
        vocab_size,
        spec.embedding_dim,
        position_dim=spec.position_embedding_dim,
        max_distance=spec.max_relative_distance,
    )
