"""Generative few-shot NER: pointer decoding with prompt-guided attention.

The encoder is a transformer whose every layer attends over learnable
key/value prefix rows (the prompt). The decoder emits triples
(start position, end position, entity type) followed by a terminator;
spans use inclusive end indices. Illegal emissions are masked out during
decoding, never post-filtered.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import torch
from torch import nn

from kextract.dataio.records import TaggedSentence
from kextract.dataio.vocab import Vocabulary
from kextract.models.encoders import TransformerTextEncoder
from kextract.models.layers import NEG_INF
from kextract.models.spec import EncoderSpec, LabelSchema

logger = logging.getLogger(__name__)


@dataclass
class SpanGenerationState:
    """Decoding state: emitted triples plus the position in the grammar."""

    length: int
    num_types: int
    triples: list[tuple[int, int, int]] = field(default_factory=list)
    phase: str = "start"  # start -> end -> type -> start ...
    pending_start: int | None = None

    @property
    def terminator_id(self) -> int:
        return self.length + self.num_types

    def type_id(self, type_index: int) -> int:
        return self.length + type_index

    def covered(self, position: int) -> bool:
        return any(s <= position <= e for s, e, _t in self.triples)

    def legal_ids(self) -> list[int]:
        if self.phase == "start":
            legal = [p for p in range(self.length) if not self.covered(p)]
            legal.append(self.terminator_id)
            return legal
        if self.phase == "end":
            legal = []
            for e in range(self.pending_start, self.length):
                if self.covered(e):
                    break
                legal.append(e)
            return legal
        return [self.type_id(k) for k in range(self.num_types)]

    def advance(self, emission: int) -> None:
        if self.phase == "start":
            if emission == self.terminator_id:
                self.phase = "done"
            else:
                self.pending_start = emission
                self.phase = "end"
        elif self.phase == "end":
            self.triples.append((self.pending_start, emission, -1))
            self.phase = "type"
        elif self.phase == "type":
            start, end, _ = self.triples[-1]
            self.triples[-1] = (start, end, emission - self.length)
            self.pending_start = None
            self.phase = "start"
        else:
            raise ValueError("decoding already terminated")

    def complete_triples(self) -> list[tuple[int, int, int]]:
        return [t for t in self.triples if t[2] >= 0]


class PromptPrefixes(nn.Module):
    """Per-layer learnable key/value prefix rows shared across heads."""

    def __init__(self, depth: int, prefix_length: int, head_dim: int):
        super().__init__()
        self.keys = nn.ParameterList(
            nn.Parameter(torch.zeros(prefix_length, head_dim)) for _ in range(depth)
        )
        self.values = nn.ParameterList(
            nn.Parameter(torch.zeros(prefix_length, head_dim)) for _ in range(depth)
        )

    def as_list(self):
        return [
            (k.unsqueeze(0), v.unsqueeze(0)) for k, v in zip(self.keys, self.values)
        ]


class SpanGenerator(nn.Module):
    def __init__(
        self,
        spec: EncoderSpec,
        schema: LabelSchema,
        vocab: Vocabulary,
        prefix_length: int = 10,
        max_steps: int = 60,
    ):
        super().__init__()
        if schema.task != "ner":
            raise ValueError("SpanGenerator requires a ner schema")
        self.spec = spec
        self.schema = schema
        self.vocab = vocab
        self.max_steps = max_steps
        self.entity_types = tuple(t[2:] for t in schema.labels if t.startswith("B-"))
        num_heads = spec.num_heads if spec.kind == "transformer" else 4
        self.embedding = nn.Embedding(len(vocab), spec.embedding_dim, padding_idx=0)
        self.encoder = TransformerTextEncoder(
            spec.embedding_dim, spec.hidden_dim, spec.depth, num_heads, spec.ff_dim
        )
        self.prefixes = PromptPrefixes(
            spec.depth, prefix_length, spec.hidden_dim // num_heads
        )
        hidden = spec.hidden_dim
        self.decoder = nn.GRUCell(hidden, hidden)
        self.pointer = nn.Linear(hidden, hidden)
        # entity types, terminator, and the start-of-decode symbol
        self.symbol_embedding = nn.Embedding(len(self.entity_types) + 2, hidden)
        self.symbol_scores = nn.Linear(hidden, len(self.entity_types) + 1)

    @property
    def num_types(self) -> int:
        return len(self.entity_types)

    def encode_source(self, ids: torch.Tensor, mask: torch.Tensor):
        x = self.embedding(ids)
        features, pooled = self.encoder(x, mask, prefixes=self.prefixes.as_list())
        return features, pooled

    def emission_embedding(self, emission: int, features: torch.Tensor) -> torch.Tensor:
        """Decoder input for the previous emission of one sentence."""
        n = features.shape[0]
        if emission < n:
            return features[emission]
        return self.symbol_embedding(torch.tensor(emission - n, device=features.device))

    def bos_embedding(self, device=None) -> torch.Tensor:
        return self.symbol_embedding(torch.tensor(self.num_types + 1, device=device))

    def decode_step(
        self, hidden: torch.Tensor, prev: torch.Tensor, features: torch.Tensor,
        mask: torch.Tensor | None = None,
    ):
        """One decoder step over a batch.

        hidden (B, h), prev (B, h), features (B, n, h). Returns logits
        (B, n + T + 1) laid out [positions..., types..., terminator] and the
        new hidden state. ``mask`` hides padded source positions.
        """
        new_hidden = self.decoder(prev, hidden)
        query = self.pointer(new_hidden)
        pointer_scores = torch.einsum("bh,bnh->bn", query, features)
        if mask is not None:
            pointer_scores = pointer_scores + (1.0 - mask.to(query.dtype)) * NEG_INF
        symbol = self.symbol_scores(new_hidden)
        return torch.cat([pointer_scores, symbol], dim=-1), new_hidden

    def gold_spans(self, sentence: TaggedSentence) -> set[tuple[int, int, str]]:
        """(start, inclusive end, type) triples from BIO tags."""
        return {(s, e - 1, t) for s, e, t in sentence.entity_spans()}

    def _gold_emissions(self, sentence: TaggedSentence, n: int) -> list[int]:
        seq = []
        for start, end, etype in sorted(self.gold_spans(sentence)):
            seq.extend((start, end, n + self.entity_types.index(etype)))
        seq.append(n + self.num_types)
        return seq

    def collate(self, records: list[TaggedSentence], **_kw):
        n = max(len(r.tokens) for r in records)
        batch = len(records)
        ids = torch.zeros(batch, n, dtype=torch.long)
        mask = torch.zeros(batch, n, dtype=torch.long)
        golds = [self._gold_emissions(r, n) for r in records]
        steps = max(len(g) for g in golds)
        targets = torch.full((batch, steps), -100, dtype=torch.long)
        for b, record in enumerate(records):
            k = len(record.tokens)
            ids[b, :k] = torch.tensor(self.vocab.encode(record.tokens))
            mask[b, :k] = 1
            targets[b, : len(golds[b])] = torch.tensor(golds[b])
        return ids, mask, targets, records

    def loss_batch(self, batch):
        ids, mask, targets, _records = batch
        features, pooled = self.encode_source(ids, mask)
        batch_size, steps = targets.shape
        hidden = pooled
        prev = self.bos_embedding(ids.device).expand(batch_size, -1)
        total = features.new_zeros(())
        count = 0
        for step in range(steps):
            logits, hidden = self.decode_step(hidden, prev, features, mask)
            target = targets[:, step]
            loss = nn.functional.cross_entropy(logits, target.clamp_min(0), reduction="none")
            live = (target >= 0).to(loss.dtype)
            total = total + (loss * live).sum()
            count += int(live.sum())
            # teacher forcing: next input embeds the gold emission
            next_prev = []
            for b in range(batch_size):
                t = int(target[b])
                next_prev.append(self.emission_embedding(max(t, 0), features[b]))
            prev = torch.stack(next_prev)
        return total / max(count, 1)

    def generate_spans(self, item, max_steps: int | None = None) -> set[tuple[int, int, str]]:
        """Greedy constrained decoding for one sentence."""
        tokens = list(item.tokens) if isinstance(item, TaggedSentence) else list(item)
        if not tokens:
            return set()
        max_steps = max_steps or self.max_steps
        ids = torch.tensor([self.vocab.encode(tokens)], dtype=torch.long)
        mask = torch.ones_like(ids)
        features, pooled = self.encode_source(ids, mask)
        state = SpanGenerationState(length=len(tokens), num_types=self.num_types)
        hidden = pooled
        prev = self.bos_embedding(ids.device).unsqueeze(0)
        for _step in range(max_steps):
            logits, hidden = self.decode_step(hidden, prev, features)
            masked = torch.full_like(logits[0], NEG_INF)
            legal = state.legal_ids()
            masked[legal] = logits[0, legal]
            emission = int(masked.argmax())
            state.advance(emission)
            if state.phase == "done":
                break
            prev = self.emission_embedding(emission, features[0]).unsqueeze(0)
        else:
            logger.warning("max_steps=%d exceeded; returning partial result", max_steps)
        return {
            (s, e, self.entity_types[t]) for s, e, t in state.complete_triples()
        }

    def predict_batch(self, batch):
        _ids, _mask, _targets, records = batch
        return [self.generate_spans(r) for r in records]
