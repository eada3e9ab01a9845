"""Configuration, the train/validate/predict engine, metrics, sweeps."""

from kextract.core.config import ConfigNode, compose_config, parse_override
from kextract.core.engine import (
    TrainingDiverged,
    TrainState,
    config_hash,
    new_artifact,
    predict,
    train,
    validate,
)
from kextract.core.metrics import (
    LabelMetrics,
    MetricReport,
    classification_f1,
    entity_f1,
    triple_f1,
)
from kextract.core.sweep import SweepResult, SweepSpec, Trial, sweep

__all__ = [
    "ConfigNode",
    "LabelMetrics",
    "MetricReport",
    "SweepResult",
    "SweepSpec",
    "TrainState",
    "TrainingDiverged",
    "Trial",
    "classification_f1",
    "compose_config",
    "config_hash",
    "entity_f1",
    "new_artifact",
    "parse_override",
    "predict",
    "sweep",
    "train",
    "triple_f1",
    "validate",
]
