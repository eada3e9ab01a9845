"""Micro precision/recall/F1 for tagging, classification and triples.

All counting is integer arithmetic; ratios are formed once at the end.
Precision with zero predictions is 0 by convention and flagged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from kextract.dataio.records import TaggedSentence
from kextract.models.spec import LabelSchema


@dataclass(frozen=True)
class LabelMetrics:
    precision: float
    recall: float
    f1: float
    support: int
    tp: int = 0
    fp: int = 0
    fn: int = 0


@dataclass(frozen=True)
class MetricReport:
    precision: float
    recall: float
    f1: float
    support: int
    per_label: dict[str, LabelMetrics] = field(default_factory=dict)
    zero_support: bool = False
    zero_predictions: bool = False

    def get(self, key: str) -> float:
        if key not in ("precision", "recall", "f1"):
            raise KeyError(key)
        return getattr(self, key)

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
            "zero_support": self.zero_support,
            "zero_predictions": self.zero_predictions,
            "per_label": {
                name: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for name, m in self.per_label.items()
            },
        }


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    # 2PR/(P+R) on the integer counts: a single rounding keeps F1 inside
    # [min(P,R), max(P,R)] exactly
    f1 = 2 * tp / (2 * tp + fp + fn) if tp else 0.0
    return precision, recall, f1


def _report(tp: int, fp: int, fn: int, per_label: dict[str, LabelMetrics]) -> MetricReport:
    precision, recall, f1 = _prf(tp, fp, fn)
    return MetricReport(
        precision=precision,
        recall=recall,
        f1=f1,
        support=tp + fn,
        per_label=per_label,
        zero_support=tp + fn == 0,
        zero_predictions=tp + fp == 0,
    )


def _per_label_from_counts(counts: dict[str, list[int]]) -> dict[str, LabelMetrics]:
    out = {}
    for label in sorted(counts):
        tp, fp, fn = counts[label]
        precision, recall, f1 = _prf(tp, fp, fn)
        out[label] = LabelMetrics(precision, recall, f1, support=tp + fn, tp=tp, fp=fp, fn=fn)
    return out


def entity_f1(gold: list[TaggedSentence], pred: list[TaggedSentence]) -> MetricReport:
    """Span-level exact-match micro F1: an entity counts only when its
    (start, end, type) triple matches exactly."""
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold sentences vs {len(pred)} predicted")
    tp = fp = fn = 0
    counts: dict[str, list[int]] = {}
    for i, (g, p) in enumerate(zip(gold, pred)):
        if len(g.tokens) != len(p.tokens):
            raise ValueError(f"sentence {i}: token counts differ")
        g_spans = set(g.entity_spans())
        p_spans = set(p.entity_spans())
        tp += len(g_spans & p_spans)
        fp += len(p_spans - g_spans)
        fn += len(g_spans - p_spans)
        for span in g_spans | p_spans:
            slot = counts.setdefault(span[2], [0, 0, 0])
            if span in g_spans and span in p_spans:
                slot[0] += 1
            elif span in p_spans:
                slot[1] += 1
            else:
                slot[2] += 1
    return _report(tp, fp, fn, _per_label_from_counts(counts))


def classification_f1(
    gold: list[str], pred: list[str], schema: LabelSchema
) -> MetricReport:
    """Micro F1 over labels; when the schema defines a negative label, both
    golds and predictions of it count as "no extraction" (SemEval style)."""
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold labels vs {len(pred)} predictions")
    known = set(schema.labels)
    for label in list(gold) + list(pred):
        if label not in known:
            raise ValueError(f"unknown label {label!r}")
    negative = schema.negative_label
    tp = fp = fn = 0
    counts: dict[str, list[int]] = {
        label: [0, 0, 0] for label in schema.labels if label != negative
    }
    for g, p in zip(gold, pred):
        g_pos = g != negative
        p_pos = p != negative
        if p_pos and g == p:
            tp += 1
            counts[p][0] += 1
        else:
            if p_pos:
                fp += 1
                counts[p][1] += 1
            if g_pos:
                fn += 1
                counts[g][2] += 1
    return _report(tp, fp, fn, _per_label_from_counts(counts))


def triple_f1(
    gold: list[set[tuple]], pred: list[set[tuple]]
) -> MetricReport:
    """Micro F1 over per-document (head, tail, relation) triple sets."""
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold documents vs {len(pred)} predictions")
    tp = fp = fn = 0
    for g, p in zip(gold, pred):
        tp += len(g & p)
        fp += len(p - g)
        fn += len(g - p)
    return _report(tp, fp, fn, {})
