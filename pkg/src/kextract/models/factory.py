"""Construction of task models from (spec, schema, scenario)."""

from __future__ import annotations

from torch import nn

from kextract.dataio.vocab import Vocabulary
from kextract.models.artifact import ModelArtifact
from kextract.models.init import init_parameters
from kextract.models.pipelines import SentenceClassifier, SequenceTagger
from kextract.models.spec import EncoderSpec, LabelSchema

SCENARIOS = ("standard", "document", "multimodal", "fewshot")


def build_model(
    spec: EncoderSpec,
    schema: LabelSchema,
    vocab: Vocabulary,
    scenario: str = "standard",
    seed: int | None = None,
) -> nn.Module:
    if scenario == "standard":
        if schema.task == "ner":
            model = SequenceTagger(spec, schema, vocab)
        else:
            model = SentenceClassifier(spec, schema, vocab)
    elif scenario == "document":
        from kextract.docre.pipeline import DocumentRelationModel

        model = DocumentRelationModel(spec, schema, vocab)
    elif scenario == "multimodal":
        from kextract.multimodal.pipeline import build_multimodal_model

        model = build_multimodal_model(spec, schema, vocab)
    elif scenario == "fewshot":
        if schema.task == "re":
            from kextract.lowres.prompt_model import PromptRelationModel

            model = PromptRelationModel(spec, schema, vocab)
        else:
            from kextract.lowres.generator import SpanGenerator

            model = SpanGenerator(spec, schema, vocab)
    else:
        raise ValueError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")
    if seed is not None:
        init_parameters(model, seed)
    return model


def instantiate(artifact: ModelArtifact) -> nn.Module:
    """Rebuild the torch model an artifact describes and load its parameters."""
    model = build_model(
        artifact.spec, artifact.schema, artifact.vocabulary, artifact.scenario
    )
    artifact.load_into(model)
    model.eval()
    return model
