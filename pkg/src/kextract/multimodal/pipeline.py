"""Multimodal NER and RE: fused transformer encoding, standard heads."""

from __future__ import annotations

import logging

import torch
from torch import nn

from kextract.dataio.records import FewShotRelationRecord, TaggedSentence
from kextract.dataio.vocab import Vocabulary
from kextract.models.encoders import TransformerTextEncoder
from kextract.models.heads import ClassificationHead, TaggingHead
from kextract.models.spec import EncoderSpec, LabelSchema
from kextract.multimodal.features import VisualFeatureBundle
from kextract.multimodal.fusion import FusionConfig, VisualProjector, batch_prefixes

logger = logging.getLogger(__name__)


def _split_records(records):
    """Accept (record, bundle) pairs or bare records; warn when a bundle is
    missing so the text-only degradation is visible."""
    texts, bundles = [], []
    for item in records:
        if isinstance(item, tuple):
            record, bundle = item
        else:
            record, bundle = item, None
        if bundle is None:
            logger.warning("record without visual bundle; running text-only")
        texts.append(record)
        bundles.append(bundle)
    return texts, bundles


class FusedEncoderBase(nn.Module):
    def __init__(self, spec: EncoderSpec, vocab: Vocabulary):
        super().__init__()
        if spec.kind != "transformer":
            raise ValueError("multimodal fusion requires a transformer encoder")
        if spec.visual_dim is None:
            raise ValueError("spec.visual_dim must be set for a fused model")
        self.spec = spec
        self.vocab = vocab
        self.fusion = FusionConfig(
            visual_dim=spec.visual_dim,
            depth=spec.depth,
            head_dim=spec.hidden_dim // spec.num_heads,
            max_objects=spec.max_objects,
        )
        self.projector = VisualProjector(self.fusion)
        self.encoder = TransformerTextEncoder(
            spec.embedding_dim, spec.hidden_dim, spec.depth, spec.num_heads, spec.ff_dim
        )
        self.embedding = nn.Embedding(len(vocab), spec.embedding_dim, padding_idx=0)

    def encode_fused(self, ids, mask, bundles):
        prefixes = [
            batch_prefixes(bundles, layer, self.projector)
            for layer in range(self.spec.depth)
        ]
        x = self.embedding(ids)
        return self.encoder(x, mask, prefixes=prefixes)


class FusedRelationClassifier(FusedEncoderBase):
    """Sentence classification from tokens + mention spans + image features."""

    def __init__(self, spec: EncoderSpec, schema: LabelSchema, vocab: Vocabulary):
        super().__init__(spec, vocab)
        self.schema = schema
        self.head = ClassificationHead(spec.hidden_dim, len(schema))

    def collate(self, records, **_kw):
        texts, bundles = _split_records(records)
        n = max(len(r.tokens) for r in texts)
        ids = torch.zeros(len(texts), n, dtype=torch.long)
        mask = torch.zeros_like(ids)
        target = torch.zeros(len(texts), dtype=torch.long)
        for b, record in enumerate(texts):
            k = len(record.tokens)
            ids[b, :k] = torch.tensor(self.vocab.encode(record.tokens))
            mask[b, :k] = 1
            label = record.relation
            target[b] = (
                self.schema.labels.index(label) if label in self.schema.labels else 0
            )
        return ids, mask, bundles, target

    def loss_batch(self, batch):
        ids, mask, bundles, target = batch
        _features, pooled = self.encode_fused(ids, mask, bundles)
        return self.head.loss(pooled, target)

    def predict_batch(self, batch):
        ids, mask, bundles, _target = batch
        _features, pooled = self.encode_fused(ids, mask, bundles)
        proba = self.head(pooled)
        conf, idx = proba.max(dim=-1)
        return [self.schema.labels[int(i)] for i in idx], [float(c) for c in conf]


class FusedTagger(FusedEncoderBase):
    """BIO tagging with visual prefixes; decoding stays transition-legal."""

    def __init__(self, spec: EncoderSpec, schema: LabelSchema, vocab: Vocabulary):
        super().__init__(spec, vocab)
        self.schema = schema
        self.head = TaggingHead(spec.hidden_dim, schema.labels)

    def collate(self, records, **_kw):
        texts, bundles = _split_records(records)
        n = max(len(s.tokens) for s in texts)
        ids = torch.zeros(len(texts), n, dtype=torch.long)
        mask = torch.zeros_like(ids)
        target = torch.zeros(len(texts), n, dtype=torch.long)
        for b, sent in enumerate(texts):
            k = len(sent.tokens)
            ids[b, :k] = torch.tensor(self.vocab.encode(sent.tokens))
            mask[b, :k] = 1
            target[b, :k] = torch.tensor([self.schema.index(t) for t in sent.tags])
        return ids, mask, bundles, target

    def loss_batch(self, batch):
        ids, mask, bundles, target = batch
        features, _pooled = self.encode_fused(ids, mask, bundles)
        return self.head.loss(features, target, mask)

    def predict_batch(self, batch):
        ids, mask, bundles, _target = batch
        features, _pooled = self.encode_fused(ids, mask, bundles)
        lengths = [int(n) for n in mask.sum(dim=1)]
        return self.head.decode(features, lengths)


def build_multimodal_model(spec: EncoderSpec, schema: LabelSchema, vocab: Vocabulary):
    if schema.task == "ner":
        return FusedTagger(spec, schema, vocab)
    if schema.task == "re":
        return FusedRelationClassifier(spec, schema, vocab)
    raise ValueError(f"multimodal scenario does not support task {schema.task!r}")


def multimodal_pipeline(
    model: FusedEncoderBase,
    record: TaggedSentence | FewShotRelationRecord,
    bundle: VisualFeatureBundle | None,
):
    """Run one (record, bundle) pair; a missing bundle degrades to text-only."""
    batch = model.collate([(record, bundle)])
    with torch.no_grad():
        out = model.predict_batch(batch)
    if isinstance(model, FusedTagger):
        return out[0]
    labels, confidences = out
    return labels[0], confidences[0]
