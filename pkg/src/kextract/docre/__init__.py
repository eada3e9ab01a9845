"""Document-level relation extraction."""

from kextract.docre.classifier import (
    PairCell,
    PairPrediction,
    adaptive_threshold_loss,
    classify_pairs,
)
from kextract.docre.pair_matrix import (
    EntityPairMatrix,
    build_pair_matrix,
    mask_diagonal,
    pair_features,
)
from kextract.docre.pipeline import (
    DocTriple,
    DocumentRelationModel,
    docre_schema,
    document_pipeline,
)
from kextract.docre.pooling import pool_entity
from kextract.docre.refiner import UNetRefiner, unet_refine
from kextract.docre.synth import DocSynthConfig, generate_documents, type_rule

__all__ = [
    "DocSynthConfig",
    "DocTriple",
    "DocumentRelationModel",
    "EntityPairMatrix",
    "PairCell",
    "PairPrediction",
    "UNetRefiner",
    "adaptive_threshold_loss",
    "build_pair_matrix",
    "classify_pairs",
    "docre_schema",
    "document_pipeline",
    "generate_documents",
    "mask_diagonal",
    "pair_features",
    "pool_entity",
    "type_rule",
    "unet_refine",
]
