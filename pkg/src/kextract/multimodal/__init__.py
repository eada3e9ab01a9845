"""Prefix-fused multimodal attention for NER and RE."""

from kextract.multimodal.features import (
    VisualFeatureBundle,
    read_feature_file,
    write_feature_file,
)
from kextract.multimodal.fusion import (
    FusionConfig,
    VisualProjector,
    batch_prefixes,
    fused_attention,
    project_visual,
)
from kextract.multimodal.pipeline import (
    FusedRelationClassifier,
    FusedTagger,
    build_multimodal_model,
    multimodal_pipeline,
)

__all__ = [
    "FusedRelationClassifier",
    "FusedTagger",
    "FusionConfig",
    "VisualFeatureBundle",
    "VisualProjector",
    "batch_prefixes",
    "build_multimodal_model",
    "fused_attention",
    "multimodal_pipeline",
    "project_visual",
    "read_feature_file",
    "write_feature_file",
]
