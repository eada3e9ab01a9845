"""Standard-scenario task models built from embedder + encoder + head."""

from __future__ import annotations

import torch
from torch import nn

from kextract.dataio.records import AttributeRecord, RelationRecord, TaggedSentence
from kextract.dataio.vocab import Vocabulary
from kextract.models.embedding import PositionalWordEmbedder, resolve_mention_tokens
from kextract.models.encoders import CapsuleEncoder, GcnEncoder, build_encoder
from kextract.models.graph import chain_adjacency
from kextract.models.heads import CapsuleLengthHead, ClassificationHead, TaggingHead
from kextract.models.spec import EncoderSpec, LabelSchema


class SequenceTagger(nn.Module):
    """Token tagging: word embeddings, any encoder, constrained BIO decode."""

    def __init__(self, spec: EncoderSpec, schema: LabelSchema, vocab: Vocabulary):
        super().__init__()
        if schema.task != "ner":
            raise ValueError("SequenceTagger requires a ner schema")
        self.spec = spec
        self.schema = schema
        self.vocab = vocab
        self.embedder = PositionalWordEmbedder(len(vocab), spec.embedding_dim)
        self.encoder = build_encoder(spec, spec.embedding_dim)
        self.head = TaggingHead(spec.hidden_dim, schema.labels)

    def _encode(self, ids: torch.Tensor, mask: torch.Tensor):
        x = self.embedder(ids)
        if isinstance(self.encoder, GcnEncoder):
            adjacency = chain_adjacency(mask.sum(dim=1), ids.shape[1]).to(x.dtype)
            return self.encoder(x, mask, adjacency)
        return self.encoder(x, mask)

    def forward(self, ids: torch.Tensor, mask: torch.Tensor):
        features, _pooled = self._encode(ids, mask)
        return self.head.logits(features)

    def loss(self, ids, mask, target):
        features, _ = self._encode(ids, mask)
        return self.head.loss(features, target, mask)

    def decode(self, ids, mask) -> list[list[str]]:
        features, _ = self._encode(ids, mask)
        lengths = [int(n) for n in mask.sum(dim=1)]
        return self.head.decode(features, lengths)

    def collate(self, records: list[TaggedSentence], **_kw):
        return batch_tagged(records, self.vocab, self.schema)

    def loss_batch(self, batch):
        ids, mask, target = batch
        return self.loss(ids, mask, target)

    def predict_batch(self, batch) -> list[list[str]]:
        ids, mask, _target = batch
        return self.decode(ids, mask)


def batch_tagged(
    sentences: list[TaggedSentence], vocab: Vocabulary, schema: LabelSchema
):
    """Pad a batch of tagged sentences into (ids, mask, target) tensors."""
    n = max(len(s.tokens) for s in sentences)
    ids = torch.zeros(len(sentences), n, dtype=torch.long)
    mask = torch.zeros(len(sentences), n, dtype=torch.long)
    target = torch.zeros(len(sentences), n, dtype=torch.long)
    for b, sent in enumerate(sentences):
        k = len(sent.tokens)
        ids[b, :k] = torch.tensor(vocab.encode(sent.tokens))
        mask[b, :k] = 1
        target[b, :k] = torch.tensor([schema.index(t) for t in sent.tags])
    return ids, mask, target


class SentenceClassifier(nn.Module):
    """RE/AE: position-featured embeddings, any encoder, label head."""

    def __init__(self, spec: EncoderSpec, schema: LabelSchema, vocab: Vocabulary):
        super().__init__()
        if schema.task not in ("re", "ae"):
            raise ValueError("SentenceClassifier requires a re or ae schema")
        if spec.kind == "capsule" and spec.num_capsules != len(schema):
            raise ValueError("capsule classifier needs num_capsules == number of labels")
        self.spec = spec
        self.schema = schema
        self.vocab = vocab
        self.embedder = PositionalWordEmbedder(
            len(vocab),
            spec.embedding_dim,
            position_dim=spec.position_embedding_dim,
            max_distance=spec.max_relative_distance,
        )
        self.encoder = build_encoder(spec, self.embedder.output_dim)
        if isinstance(self.encoder, CapsuleEncoder):
            self.head = CapsuleLengthHead(spec.num_capsules, spec.capsule_dim)
        else:
            self.head = ClassificationHead(spec.hidden_dim, len(schema))

    def _encode(self, ids, mask, head_index, tail_index):
        x = self.embedder(ids, head_index=head_index, tail_index=tail_index)
        if isinstance(self.encoder, GcnEncoder):
            adjacency = chain_adjacency(mask.sum(dim=1), ids.shape[1]).to(x.dtype)
            return self.encoder(x, mask, adjacency)
        return self.encoder(x, mask)

    def forward(self, ids, mask, head_index, tail_index):
        _features, pooled = self._encode(ids, mask, head_index, tail_index)
        return self.head(pooled)

    def loss(self, ids, mask, head_index, tail_index, target):
        _features, pooled = self._encode(ids, mask, head_index, tail_index)
        return self.head.loss(pooled, target)

    def collate(self, records, language: str = "english", mode: str = "strict", **_kw):
        return batch_mentions(records, self.vocab, self.schema, language, mode)

    def loss_batch(self, batch):
        return self.loss(*batch)

    def predict_batch(self, batch):
        """(labels, confidences) for a collated batch."""
        ids, mask, head, tail, _target = batch
        proba = self.forward(ids, mask, head, tail)
        conf, idx = proba.max(dim=-1)
        labels = [self.schema.labels[int(i)] for i in idx]
        return labels, [float(c) for c in conf]


def batch_mentions(
    records: list[RelationRecord | AttributeRecord],
    vocab: Vocabulary,
    schema: LabelSchema,
    language: str = "english",
    mode: str = "strict",
):
    """(ids, mask, head_index, tail_index, target) for a batch of records."""
    resolved = [resolve_mention_tokens(r, language, mode) for r in records]
    n = max(len(tokens) for tokens, _, _ in resolved)
    count = len(records)
    ids = torch.zeros(count, n, dtype=torch.long)
    mask = torch.zeros(count, n, dtype=torch.long)
    head = torch.zeros(count, dtype=torch.long)
    tail = torch.zeros(count, dtype=torch.long)
    target = torch.zeros(count, dtype=torch.long)
    for b, (record, (tokens, h, t)) in enumerate(zip(records, resolved)):
        ids[b, : len(tokens)] = torch.tensor(vocab.encode(tokens))
        mask[b, : len(tokens)] = 1
        head[b], tail[b] = h, t
        label = record.relation if isinstance(record, RelationRecord) else record.attribute
        # prediction inputs carry no (known) label; the target slot is unused then
        target[b] = schema.labels.index(label) if label in schema.labels else 0
    return ids, mask, head, tail, target
