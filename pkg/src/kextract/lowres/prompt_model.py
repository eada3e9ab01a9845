"""Prompt-tuned relation classifier with virtual answer/type words."""

from __future__ import annotations

import math

import torch
from torch import nn

from kextract.dataio.records import FewShotRelationRecord
from kextract.dataio.vocab import Vocabulary
from kextract.lowres.answer_words import (
    DEFAULT_ROLES,
    VirtualTokenBank,
    init_virtual_answer_words,
    relation_logits,
    synergy_loss,
)
from kextract.lowres.prompt import PromptTemplate, build_relation_prompt, default_template
from kextract.models.encoders import TransformerTextEncoder
from kextract.models.spec import EncoderSpec, LabelSchema


class PromptRelationModel(nn.Module):
    """Prompt ids -> encoder -> mask-position hidden -> answer-word scores.

    Virtual type tokens embed through the bank's type vectors; the
    structural synergy term couples type and answer words during training.
    """

    def __init__(
        self,
        spec: EncoderSpec,
        schema: LabelSchema,
        vocab: Vocabulary,
        template: PromptTemplate | None = None,
        synergy_weight: float = 0.1,
    ):
        super().__init__()
        self.spec = spec
        self.schema = schema
        self.vocab = vocab
        self.template = template or default_template()
        self.synergy_weight = synergy_weight
        self.embedding = nn.Embedding(len(vocab), spec.embedding_dim, padding_idx=0)
        num_heads = spec.num_heads if spec.kind == "transformer" else 4
        self.encoder = TransformerTextEncoder(
            spec.embedding_dim, spec.hidden_dim, spec.depth, num_heads, spec.ff_dim
        )
        self.to_answer_space = nn.Linear(spec.hidden_dim, spec.embedding_dim)
        self.bank = VirtualTokenBank(schema.labels, DEFAULT_ROLES, spec.embedding_dim)

    def init_answer_words_from_labels(self):
        """Knowledge-informed (re)initialization from label-name embeddings."""
        with torch.no_grad():
            bank = init_virtual_answer_words(
                self.schema, self._scaled_embedding_table(), self.vocab
            )
            self.bank.answer_words.copy_(bank.answer_words)
            self.bank.type_words.copy_(bank.type_words)

    def knowledge_informed_init(self):
        """Stand-in for prompt-tuning over a pretrained tied-embedding LM.

        Without pretraining, a randomly projected residual stream carries no
        relationship to the embedding table, so label-name answer vectors
        would start meaningless. This initialization keeps the stream
        embedding-aligned (identity input/value/output projections, zero
        feed-forward write-back) and then sets answer/type words from the
        label names. Queries/keys stay random; training moves everything.
        """
        if self.spec.hidden_dim != self.spec.embedding_dim:
            raise ValueError("knowledge-informed init requires hidden_dim == embedding_dim")
        eye = torch.eye(self.spec.hidden_dim)
        with torch.no_grad():
            self.encoder.input_proj.weight.copy_(eye)
            self.encoder.input_proj.bias.zero_()
            for layer in self.encoder.layers:
                layer.attention.v_proj.weight.copy_(eye)
                layer.attention.v_proj.bias.zero_()
                layer.attention.out_proj.weight.copy_(eye)
                layer.attention.out_proj.bias.zero_()
                layer.ff[2].weight.zero_()
                layer.ff[2].bias.zero_()
            self.to_answer_space.weight.copy_(eye)
            self.to_answer_space.bias.zero_()
        self.init_answer_words_from_labels()

    def _scaled_embedding_table(self) -> torch.Tensor:
        return self.embedding.weight.detach() * math.sqrt(self.spec.embedding_dim)

    def _embed(self, ids: torch.Tensor) -> torch.Tensor:
        """Vocabulary ids embed normally (scaled by sqrt(dim), as usual for
        transformer inputs); virtual ids pull bank type vectors."""
        vocab_size = self.embedding.num_embeddings
        clamped = ids.clamp(max=vocab_size - 1)
        base = self.embedding(clamped) * math.sqrt(self.spec.embedding_dim)
        virtual = ids >= vocab_size
        if virtual.any():
            rows = self.bank.type_words[(ids[virtual] - vocab_size)]
            base = base.masked_scatter(virtual.unsqueeze(-1), rows.to(base.dtype))
        return base

    def mask_hidden(self, ids: torch.Tensor, mask: torch.Tensor, positions: torch.Tensor):
        x = self._embed(ids)
        features, _pooled = self.encoder(x, mask)
        rows = features[torch.arange(ids.shape[0]), positions]
        return self.to_answer_space(rows)

    def forward(self, ids, mask, positions):
        hidden = self.mask_hidden(ids, mask, positions)
        return torch.softmax(relation_logits(hidden, self.bank), dim=-1)

    def collate(self, records: list[FewShotRelationRecord], **_kw):
        prompts = [build_relation_prompt(r, self.template, self.vocab) for r in records]
        n = max(len(p) for p, _ in prompts)
        ids = torch.zeros(len(records), n, dtype=torch.long)
        mask = torch.zeros(len(records), n, dtype=torch.long)
        positions = torch.zeros(len(records), dtype=torch.long)
        target = torch.zeros(len(records), dtype=torch.long)
        for b, (record, (prompt, mask_pos)) in enumerate(zip(records, prompts)):
            ids[b, : len(prompt)] = torch.tensor(prompt)
            mask[b, : len(prompt)] = 1
            positions[b] = mask_pos
            target[b] = (
                self.schema.labels.index(record.relation)
                if record.relation in self.schema.labels
                else 0
            )
        return ids, mask, positions, target

    def loss_batch(self, batch):
        ids, mask, positions, target = batch
        hidden = self.mask_hidden(ids, mask, positions)
        cls_loss = nn.functional.cross_entropy(relation_logits(hidden, self.bank), target)
        if self.synergy_weight == 0:
            return cls_loss
        structural = cls_loss.new_zeros(())
        for t in target:
            structural = structural + (
                synergy_loss(
                    cls_loss.new_zeros(()),
                    self.bank,
                    "head",
                    "tail",
                    self.schema.labels[int(t)],
                    self.synergy_weight,
                )
            )
        return cls_loss + structural / len(target)

    def predict_batch(self, batch):
        ids, mask, positions, _target = batch
        proba = self.forward(ids, mask, positions)
        conf, idx = proba.max(dim=-1)
        return [self.schema.labels[int(i)] for i in idx], [float(c) for c in conf]
