"""End-to-end document-level relation extraction."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import torch
from torch import nn

from kextract.dataio.records import DocumentRecord
from kextract.dataio.vocab import Vocabulary
from kextract.docre.classifier import adaptive_threshold_loss, classify_pairs, relation_labels
from kextract.docre.pair_matrix import EntityPairMatrix, build_pair_matrix
from kextract.docre.pooling import pool_entity
from kextract.docre.refiner import UNetRefiner, unet_refine
from kextract.models.encoders import GcnEncoder, TransformerTextEncoder, build_encoder
from kextract.models.graph import chain_adjacency
from kextract.models.spec import THRESHOLD_LABEL, EncoderSpec, LabelSchema

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DocTriple:
    head_index: int
    tail_index: int
    relation: str
    score: float
    head_name: str
    tail_name: str


class DocumentRelationModel(nn.Module):
    """Encode sentences, pool mentions into entities, classify the pair matrix."""

    def __init__(
        self,
        spec: EncoderSpec,
        schema: LabelSchema,
        vocab: Vocabulary,
        pair_channels: int = 32,
        refined_channels: int = 32,
    ):
        super().__init__()
        if THRESHOLD_LABEL not in schema.labels:
            raise ValueError("document RE schema must include the threshold pseudo-label")
        self.spec = spec
        self.schema = schema
        self.vocab = vocab
        self.embedding = nn.Embedding(len(vocab), spec.embedding_dim, padding_idx=0)
        self.encoder = build_encoder(spec, spec.embedding_dim)
        self.uses_attention_context = isinstance(self.encoder, TransformerTextEncoder)
        context_dim = spec.hidden_dim if self.uses_attention_context else 0
        self.pair_proj = nn.Linear(3 * spec.hidden_dim + context_dim, pair_channels)
        self.refiner = UNetRefiner(pair_channels, refined_channels)
        self.cell_head = nn.Linear(refined_channels, len(schema.labels))

    def _encode_sentences(self, doc: DocumentRecord):
        max_n = max(len(s) for s in doc.sentences)
        ids = torch.zeros(len(doc.sentences), max_n, dtype=torch.long)
        mask = torch.zeros_like(ids)
        for s, sent in enumerate(doc.sentences):
            ids[s, : len(sent)] = torch.tensor(self.vocab.encode(sent))
            mask[s, : len(sent)] = 1
        attentions = None
        if self.uses_attention_context:
            features, _pooled, attentions = self.encoder(
                self.embedding(ids), mask, return_attention=True
            )
        elif isinstance(self.encoder, GcnEncoder):
            x = self.embedding(ids)
            adjacency = chain_adjacency(mask.sum(dim=1), max_n).to(x.dtype)
            features, _pooled = self.encoder(x, mask, adjacency)
        else:
            features, _pooled = self.encoder(self.embedding(ids), mask)
        return features, mask, attentions

    def _entity_embeddings(self, doc: DocumentRecord):
        features, _mask, attentions = self._encode_sentences(doc)
        offsets = []
        total = 0
        for sent in doc.sentences:
            offsets.append(total)
            total += len(sent)
        doc_tokens = torch.cat(
            [features[s, : len(sent)] for s, sent in enumerate(doc.sentences)], dim=0
        )
        embeddings = []
        attention_rows = []
        for cluster in doc.entities:
            mention_vectors = []
            mention_attn = torch.zeros(total, dtype=features.dtype)
            for m in cluster:
                start, end = m.span
                mention_vectors.append(features[m.sent_id, start:end].mean(dim=0))
                if attentions is not None:
                    # last layer, mean over heads and mention positions;
                    # queries/keys shift by one for the encoder's pool slot
                    last = attentions[-1][m.sent_id].mean(dim=0)
                    row = last[1 + start : 1 + end, 1 : 1 + len(doc.sentences[m.sent_id])]
                    mention_attn[
                        offsets[m.sent_id] : offsets[m.sent_id] + len(doc.sentences[m.sent_id])
                    ] += row.mean(dim=0)
            embeddings.append(pool_entity(torch.stack(mention_vectors)))
            if attentions is not None:
                attention_rows.append(mention_attn / len(cluster))
        entity_matrix = torch.stack(embeddings)
        context = None
        if attentions is not None:
            attn = torch.stack(attention_rows)  # (N, total)
            product = attn.unsqueeze(1) * attn.unsqueeze(0)  # (N, N, total)
            weight = product / product.sum(dim=-1, keepdim=True).clamp_min(1e-9)
            context = weight @ doc_tokens  # (N, N, hidden)
        return entity_matrix, context

    def pair_matrix(self, doc: DocumentRecord) -> EntityPairMatrix:
        embeddings, context = self._entity_embeddings(doc)
        matrix = build_pair_matrix(embeddings, self.pair_proj, context)
        return unet_refine(matrix, self.refiner)

    def doc_triples(self, doc: DocumentRecord, same_sentence_only: bool = False):
        """Predicted triples; with ``same_sentence_only`` the candidate pairs
        are restricted to entities sharing at least one sentence."""
        if len(doc.entities) < 2:
            logger.info("document %r has fewer than two entities; nothing to extract", doc.title)
            return []
        prediction = classify_pairs(self.pair_matrix(doc), self.cell_head, self.schema)
        allowed = None
        if same_sentence_only:
            sentences_of = [
                {m.sent_id for m in cluster} for cluster in doc.entities
            ]
            allowed = {
                (i, j)
                for i in range(len(doc.entities))
                for j in range(len(doc.entities))
                if i != j and sentences_of[i] & sentences_of[j]
            }
        triples = []
        for i, j, relation, margin in prediction.triples():
            if allowed is not None and (i, j) not in allowed:
                continue
            triples.append(
                DocTriple(
                    head_index=i,
                    tail_index=j,
                    relation=relation,
                    score=float(torch.sigmoid(torch.tensor(margin))),
                    head_name=doc.canonical_name(i),
                    tail_name=doc.canonical_name(j),
                )
            )
        return triples

    def collate(self, records: list[DocumentRecord], **_kw):
        return records

    def loss_batch(self, docs: list[DocumentRecord]):
        labels = relation_labels(self.schema)
        th_index = self.schema.labels.index(THRESHOLD_LABEL)
        losses = []
        for doc in docs:
            n = len(doc.entities)
            if n < 2:
                continue
            logits = self.cell_head(self.pair_matrix(doc).data)
            off_diag = [(i, j) for i in range(n) for j in range(n) if i != j]
            cell_logits = torch.stack([logits[i, j] for i, j in off_diag])
            positives = torch.zeros_like(cell_logits)
            index_of = {pair: row for row, pair in enumerate(off_diag)}
            for label in doc.relation_labels:
                row = index_of[(label.head, label.tail)]
                positives[row, self.schema.labels.index(label.relation)] = 1.0
            losses.append(adaptive_threshold_loss(cell_logits, positives, th_index))
        if not losses:
            raise ValueError("no document in the batch has two or more entities")
        return torch.stack(losses).mean()

    def predict_batch(self, docs: list[DocumentRecord]):
        return [self.doc_triples(doc) for doc in docs]


def document_pipeline(model: DocumentRelationModel, doc: DocumentRecord) -> list[DocTriple]:
    """Encode, pool, build, refine, classify one document."""
    with torch.no_grad():
        return model.doc_triples(doc)


def docre_schema(relations: tuple[str, ...] | list[str]) -> LabelSchema:
    """Relation labels plus the reserved adaptive-threshold pseudo-label."""
    return LabelSchema("re", tuple(relations) + (THRESHOLD_LABEL,))
