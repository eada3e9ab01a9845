"""HTTP extraction endpoint over immutable loaded artifacts.

POST /extract consumes {"text", "task", "language"}; GET /schema returns the
registry; GET /health reports model versions. Artifacts are shared
read-only across concurrent requests; identical requests produce identical
payloads (the latency field aside).
"""

from __future__ import annotations

import itertools
import time

import torch
from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from kextract.core.engine import predict
from kextract.dataio.records import RelationRecord
from kextract.dataio.tokenizer import SUPPORTED_LANGUAGES
from kextract.errors import KextractError
from kextract.models.artifact import ModelArtifact
from kextract.service.registry import SchemaRegistry, Triple, filter_by_schema

TASKS = ("ner", "re", "ae", "triple")


class ExtractionRequest(BaseModel):
    text: str
    task: str = "ner"
    language: str = "english"


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


def artifact_version(artifact: ModelArtifact) -> str:
    fp = artifact.fingerprint
    return f"v{artifact.format_version}-seed{fp.seed}-{fp.config_hash or 'untrained'}"


class ExtractionService:
    """Pure functions over the loaded artifacts; HTTP-agnostic."""

    def __init__(self, artifacts: dict[str, ModelArtifact], registry: SchemaRegistry):
        self.artifacts = artifacts
        self.registry = registry

    def versions(self) -> dict[str, str]:
        return {task: artifact_version(a) for task, a in self.artifacts.items()}

    def entities(self, text: str, language: str) -> list[dict]:
        if "ner" not in self.artifacts:
            raise KextractError("no ner artifact loaded")
        return predict(self.artifacts["ner"], text, {"language": language})

    def relation_candidates(self, text: str, language: str) -> list[Triple]:
        """NER entities, then a relation prediction for every ordered pair."""
        if "re" not in self.artifacts:
            raise KextractError("no re artifact loaded")
        entities = self.entities(text, language)
        candidates = []
        for a, b in itertools.permutations(entities, 2):
            if a["text"] == b["text"]:
                continue
            head_offset = text.find(a["text"])
            tail_offset = text.find(b["text"])
            if head_offset < 0 or tail_offset < 0 or head_offset == tail_offset:
                continue
            record = RelationRecord(
                sentence=text,
                relation="",
                head=a["text"],
                head_offset=head_offset,
                tail=b["text"],
                tail_offset=tail_offset,
            )
            out = predict(
                self.artifacts["re"], record, {"language": language, "offset_mode": "repair"}
            )
            candidates.append(
                Triple(
                    head=(a["text"], a["type"]),
                    relation=out["label"],
                    tail=(b["text"], b["type"]),
                    confidence=out["confidence"],
                )
            )
        return candidates

    def extract(self, request: ExtractionRequest) -> dict:
        body: dict = {}
        if request.task == "ner":
            body["entities"] = self.entities(request.text, request.language)
        elif request.task in ("re", "ae"):
            key = "re" if request.task == "re" else "ae"
            if key == "ae" and "ae" not in self.artifacts:
                raise KextractError("no ae artifact loaded")
            candidates = self.relation_candidates(request.text, request.language)
            body["triples"] = [t.to_dict() for t in candidates]
        else:  # triple: schema-constrained
            candidates = self.relation_candidates(request.text, request.language)
            kept = filter_by_schema(candidates, self.registry)
            body["triples"] = [t.to_dict() for t in kept]
        return body


def build_app(artifacts: dict[str, ModelArtifact], registry: SchemaRegistry) -> FastAPI:
    service = ExtractionService(artifacts, registry)
    app = FastAPI(title="kextract")

    @app.get("/health")
    def health():
        return {"status": "ok", "models": service.versions()}

    @app.get("/schema")
    def schema():
        return registry.to_dict()

    @app.post("/extract")
    def extract(request: ExtractionRequest):
        if request.task not in TASKS:
            return _error(400, "unsupported_task", f"task must be one of {list(TASKS)}")
        if request.language not in SUPPORTED_LANGUAGES:
            return _error(
                400,
                "unsupported_language",
                f"language must be one of {list(SUPPORTED_LANGUAGES)}",
            )
        if request.task == "triple" and ("ner" not in artifacts or "re" not in artifacts):
            return _error(400, "missing_model", "triple extraction needs ner and re artifacts")
        start = time.perf_counter()
        try:
            with torch.no_grad():
                body = service.extract(request)
        except KextractError as exc:
            return _error(400, "missing_model", str(exc))
        body["model_version"] = service.versions()
        body["latency_ms"] = round((time.perf_counter() - start) * 1000.0, 3)
        return body

    return app


def serve(artifacts: dict[str, ModelArtifact], registry: SchemaRegistry, port: int = 8080):
    """Run the endpoint; blocks until interrupted."""
    import uvicorn

    uvicorn.run(build_app(artifacts, registry), host="0.0.0.0", port=port)
