"""Encoder zoo, task heads and unified artifact save/load."""

from kextract.models.artifact import ModelArtifact, load_artifact, save_artifact
from kextract.models.capsule import capsule_squash, dynamic_routing, margin_loss
from kextract.models.embedding import (
    PositionalWordEmbedder,
    embed_with_positions,
    embedder_from_spec,
    resolve_mention_tokens,
)
from kextract.models.encoders import build_encoder, encode
from kextract.models.graph import chain_adjacency, graph_convolve
from kextract.models.heads import (
    CapsuleLengthHead,
    ClassificationHead,
    TaggingHead,
    apply_head,
    constrained_decode,
)
from kextract.models.init import init_parameters
from kextract.models.layers import MultiHeadSelfAttention, TransformerLayer, attend
from kextract.models.pipelines import (
    SentenceClassifier,
    SequenceTagger,
    batch_mentions,
    batch_tagged,
)
from kextract.models.spec import (
    THRESHOLD_LABEL,
    EncoderSpec,
    LabelSchema,
    TrainingFingerprint,
    bio_tagset,
    default_spec,
)

__all__ = [
    "CapsuleLengthHead",
    "ClassificationHead",
    "EncoderSpec",
    "LabelSchema",
    "ModelArtifact",
    "MultiHeadSelfAttention",
    "PositionalWordEmbedder",
    "SentenceClassifier",
    "SequenceTagger",
    "THRESHOLD_LABEL",
    "TaggingHead",
    "TrainingFingerprint",
    "TransformerLayer",
    "apply_head",
    "attend",
    "batch_mentions",
    "batch_tagged",
    "bio_tagset",
    "build_encoder",
    "capsule_squash",
    "chain_adjacency",
    "constrained_decode",
    "default_spec",
    "dynamic_routing",
    "embed_with_positions",
    "embedder_from_spec",
    "encode",
    "graph_convolve",
    "init_parameters",
    "load_artifact",
    "margin_loss",
    "resolve_mention_tokens",
    "save_artifact",
]
