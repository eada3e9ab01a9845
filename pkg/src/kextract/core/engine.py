"""Train / validate / predict over every task and scenario.

Training is deterministic: a fixed seed fixes initialization, shuffling and
the single-threaded numeric path, so repeated runs produce bit-identical
artifacts.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field

import torch

from kextract.core.config import ConfigNode
from kextract.core.metrics import MetricReport, classification_f1, entity_f1, triple_f1
from kextract.dataio.records import (
    AttributeRecord,
    DocumentRecord,
    FewShotRelationRecord,
    RelationRecord,
    TaggedSentence,
)
from kextract.dataio.tokenizer import tokenize
from kextract.dataio.vocab import Vocabulary
from kextract.errors import KextractError, ValidationError
from kextract.models.artifact import ModelArtifact
from kextract.models.factory import build_model, instantiate
from kextract.models.init import init_parameters
from kextract.models.spec import EncoderSpec, LabelSchema, TrainingFingerprint


class TrainingDiverged(KextractError):
    """Loss became NaN; message carries the batch id and parameter norm."""


@dataclass
class TrainState:
    epoch: int = 0
    step: int = 0
    best_metric: float = float("-inf")
    seed: int = 0
    stale_epochs: int = 0
    best_state: dict | None = field(default=None, repr=False)


def _cfg(config: ConfigNode | dict | None, key: str, default):
    node = ConfigNode.wrap(config)
    value = node.get(f"train.{key}", None)
    if value is None:
        value = node.get(key, default)
    return value


def config_hash(config: ConfigNode | dict | None) -> str:
    payload = json.dumps(ConfigNode.wrap(config).to_dict(), sort_keys=True, default=str)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def new_artifact(
    spec: EncoderSpec,
    schema: LabelSchema,
    vocab: Vocabulary,
    scenario: str = "standard",
    seed: int = 0,
) -> ModelArtifact:
    """Freshly initialized, untrained artifact."""
    model = build_model(spec, schema, vocab, scenario, seed=seed)
    return ModelArtifact.from_model(
        model, spec, schema, vocab, scenario, TrainingFingerprint(seed)
    )


def _make_optimizer(model, config) -> torch.optim.Optimizer:
    kind = _cfg(config, "optimizer", "sgd")
    lr = float(_cfg(config, "lr", 0.1))
    if kind == "sgd":
        return torch.optim.SGD(
            model.parameters(), lr=lr, momentum=float(_cfg(config, "momentum", 0.9))
        )
    if kind == "adam":
        return torch.optim.Adam(model.parameters(), lr=lr)
    raise KextractError(f"unknown optimizer {kind!r}")


def train(
    artifact: ModelArtifact,
    dataset: list,
    config: ConfigNode | dict | None = None,
    val_dataset: list | None = None,
) -> tuple[ModelArtifact, list[dict]]:
    """Fit the artifact's model on the dataset; returns (artifact, history).

    Checkpoints the best epoch by validation F1 (validating on the training
    set when no validation split is given) and stops early after
    ``patience`` stale epochs when configured.
    """
    if not dataset:
        raise KextractError("training dataset is empty")
    seed = int(_cfg(config, "seed", artifact.fingerprint.seed))
    epochs = int(_cfg(config, "epochs", 10))
    batch_size = int(_cfg(config, "batch_size", 16))
    patience = _cfg(config, "patience", None)
    language = _cfg(config, "language", "english")
    offset_mode = _cfg(config, "offset_mode", "strict")

    torch.manual_seed(seed)
    torch.set_num_threads(1)
    model = build_model(artifact.spec, artifact.schema, artifact.vocabulary, artifact.scenario)
    if artifact.parameters:
        artifact.load_into(model)
    else:
        init_parameters(model, seed)
    fingerprint = TrainingFingerprint(seed, config_hash(config))

    history: list[dict] = []
    state = TrainState(seed=seed)
    if epochs == 0:
        return (
            ModelArtifact.from_model(
                model, artifact.spec, artifact.schema, artifact.vocabulary,
                artifact.scenario, fingerprint,
            ),
            history,
        )

    optimizer = _make_optimizer(model, config)
    shuffler = torch.Generator().manual_seed(seed)
    eval_data = val_dataset if val_dataset else dataset

    for epoch in range(epochs):
        model.train()
        order = torch.randperm(len(dataset), generator=shuffler).tolist()
        total_loss, batches = 0.0, 0
        for start in range(0, len(dataset), batch_size):
            records = [dataset[i] for i in order[start : start + batch_size]]
            batch = model.collate(records, language=language, mode=offset_mode)
            loss = model.loss_batch(batch)
            if torch.isnan(loss):
                with torch.no_grad():
                    norm = sum(float(p.norm()) for p in model.parameters())
                raise TrainingDiverged(
                    f"NaN loss at epoch {epoch}, batch {batches} (parameter norm {norm:.3g})"
                )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total_loss += float(loss.detach())
            batches += 1
            state.step += 1
        state.epoch = epoch + 1

        snapshot = ModelArtifact.from_model(
            model, artifact.spec, artifact.schema, artifact.vocabulary,
            artifact.scenario, fingerprint,
        )
        report = validate(snapshot, eval_data, config)
        metric = report.f1
        history.append(
            {"epoch": epoch, "loss": total_loss / max(batches, 1), "f1": metric}
        )
        if metric > state.best_metric:
            state.best_metric = metric
            state.best_state = copy.deepcopy(model.state_dict())
            state.stale_epochs = 0
        else:
            state.stale_epochs += 1
            if patience is not None and state.stale_epochs >= int(patience):
                break

    if state.best_state is not None:
        model.load_state_dict(state.best_state)
    final = ModelArtifact.from_model(
        model, artifact.spec, artifact.schema, artifact.vocabulary,
        artifact.scenario, fingerprint,
    )
    return final, history


def _predicted_tag_sentences(gold: list[TaggedSentence], tags: list[list[str]]):
    return [
        TaggedSentence(sent.tokens, tuple(decoded))
        for sent, decoded in zip(gold, tags)
    ]


def validate(
    artifact: ModelArtifact,
    dataset: list,
    config: ConfigNode | dict | None = None,
) -> MetricReport:
    """Task-appropriate evaluation; never mutates the artifact."""
    if not dataset:
        raise KextractError("empty dataset: metrics are undefined")
    language = _cfg(config, "language", "english")
    offset_mode = _cfg(config, "offset_mode", "strict")
    batch_size = int(_cfg(config, "batch_size", 16))
    model = instantiate(artifact)
    task, scenario = artifact.schema.task, artifact.scenario

    with torch.no_grad():
        if scenario == "document":
            gold = [
                {(l.head, l.tail, l.relation) for l in doc.relation_labels}
                for doc in dataset
            ]
            pred = [
                {(t.head_index, t.tail_index, t.relation) for t in model.doc_triples(doc)}
                for doc in dataset
            ]
            return triple_f1(gold, pred)
        if task == "ner" and scenario == "fewshot":
            gold = [model.gold_spans(rec) for rec in dataset]
            pred = [model.generate_spans(rec) for rec in dataset]
            return triple_f1(gold, pred)
        if task == "ner":
            golds = [rec[0] if isinstance(rec, tuple) else rec for rec in dataset]
            decoded: list[list[str]] = []
            for start in range(0, len(dataset), batch_size):
                chunk = dataset[start : start + batch_size]
                batch = model.collate(chunk, language=language, mode=offset_mode)
                decoded.extend(model.predict_batch(batch))
            return entity_f1(golds, _predicted_tag_sentences(golds, decoded))
        labels: list[str] = []
        gold_labels: list[str] = []
        for start in range(0, len(dataset), batch_size):
            chunk = dataset[start : start + batch_size]
            batch = model.collate(chunk, language=language, mode=offset_mode)
            chunk_labels, _conf = model.predict_batch(batch)
            labels.extend(chunk_labels)
            for rec in chunk:
                record = rec[0] if isinstance(rec, tuple) else rec
                gold_labels.append(
                    record.attribute if isinstance(record, AttributeRecord) else record.relation
                )
        return classification_f1(gold_labels, labels, artifact.schema)


def predict(
    artifact: ModelArtifact,
    item,
    config: ConfigNode | dict | None = None,
):
    """Run one input through a trained artifact; output is JSON-serializable.

    ner: sentence string -> [{"text", "type", "start", "end"}]
    re/ae: RelationRecord / AttributeRecord -> {"label", "confidence"}
    document: DocumentRecord -> [{"head", "relation", "tail", "score"}]
    """
    language = _cfg(config, "language", "english")
    offset_mode = _cfg(config, "offset_mode", "strict")
    model = instantiate(artifact)
    task, scenario = artifact.schema.task, artifact.scenario

    with torch.no_grad():
        if scenario == "document":
            if not isinstance(item, DocumentRecord):
                raise ValidationError("document relation extraction expects a DocumentRecord")
            return [
                {
                    "title": item.title,
                    "head": t.head_name,
                    "relation": t.relation,
                    "tail": t.tail_name,
                    "score": t.score,
                }
                for t in model.doc_triples(item)
            ]
        if task == "ner" and scenario == "fewshot":
            tokens = _as_tokens(item, language)
            spans = model.generate_spans(tokens)
            return [
                {"start": s, "end": e, "type": t, "text": " ".join(tokens[s : e + 1])}
                for s, e, t in sorted(spans)
            ]
        if task == "ner":
            if isinstance(item, tuple):
                sentence, bundle = item
            else:
                sentence, bundle = item, None
            tokens = _as_tokens(sentence, language)
            if not tokens:
                return []
            gold = TaggedSentence(tuple(tokens), tuple(["O"] * len(tokens)))
            record = gold if bundle is None else (gold, bundle)
            batch = model.collate([record], language=language, mode=offset_mode)
            tags = model.predict_batch(batch)[0]
            sent = TaggedSentence(tuple(tokens), tuple(tags))
            return [
                {"text": " ".join(tokens[a:b]), "type": t, "start": a, "end": b}
                for a, b, t in sent.entity_spans()
            ]
        record = item[0] if isinstance(item, tuple) else item
        if not isinstance(record, (RelationRecord, AttributeRecord, FewShotRelationRecord)):
            raise ValidationError(f"task {task!r} cannot consume {type(item).__name__}")
        batch = model.collate([item], language=language, mode=offset_mode)
        labels, confidences = model.predict_batch(batch)
        return {"label": labels[0], "confidence": confidences[0]}


def _as_tokens(item, language: str) -> list[str]:
    if isinstance(item, str):
        return [t.text for t in tokenize(item, language)]
    if isinstance(item, TaggedSentence):
        return list(item.tokens)
    return list(item)
