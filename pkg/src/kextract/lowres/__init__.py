"""Low-resource scenarios: prompt-tuning RE, generative few-shot NER, episodes."""

from kextract.lowres.answer_words import (
    VirtualTokenBank,
    init_virtual_answer_words,
    relation_logits,
    score_relations,
    synergy_loss,
)
from kextract.lowres.episodes import Episode, read_manifest, sample_kshot, write_manifest
from kextract.lowres.generator import PromptPrefixes, SpanGenerationState, SpanGenerator
from kextract.lowres.prompt import (
    DEFAULT_TEMPLATE_TEXT,
    PromptTemplate,
    build_relation_prompt,
    default_template,
)
from kextract.lowres.prompt_model import PromptRelationModel

__all__ = [
    "DEFAULT_TEMPLATE_TEXT",
    "Episode",
    "PromptPrefixes",
    "PromptRelationModel",
    "PromptTemplate",
    "SpanGenerationState",
    "SpanGenerator",
    "VirtualTokenBank",
    "build_relation_prompt",
    "default_template",
    "init_virtual_answer_words",
    "read_manifest",
    "relation_logits",
    "sample_kshot",
    "score_relations",
    "synergy_loss",
    "write_manifest",
]
