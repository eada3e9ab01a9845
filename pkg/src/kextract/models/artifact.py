"""Unified model artifact: spec + schema + vocabulary + named parameters.

On disk an artifact is a single zip archive:

    manifest.json   format_version, scenario, spec, schema, fingerprint,
                    and a parameter index {name: {file, dtype, shape, sha256}}
    vocab.json      vocabulary content tokens (sha256 in the manifest)
    params/<i>.bin  raw little-endian array bytes, C order

Loading verifies every checksum and the format version before anything is
interpreted.
"""

from __future__ import annotations

import hashlib
import io
import json
import zipfile
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from kextract import ARTIFACT_FORMAT_VERSION
from kextract.dataio.vocab import Vocabulary
from kextract.errors import ArtifactChecksumError, ArtifactVersionError
from kextract.models.spec import EncoderSpec, LabelSchema, TrainingFingerprint

_DTYPES = {"float32": "<f4", "float64": "<f8", "int64": "<i8"}


@dataclass
class ModelArtifact:
    spec: EncoderSpec
    schema: LabelSchema
    vocabulary: Vocabulary
    parameters: dict[str, np.ndarray]
    scenario: str = "standard"
    format_version: int = ARTIFACT_FORMAT_VERSION
    fingerprint: TrainingFingerprint = field(default_factory=lambda: TrainingFingerprint(0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModelArtifact):
            return NotImplemented
        same_meta = (
            self.spec == other.spec
            and self.schema == other.schema
            and self.vocabulary == other.vocabulary
            and self.scenario == other.scenario
            and self.format_version == other.format_version
            and self.fingerprint == other.fingerprint
        )
        if not same_meta or self.parameters.keys() != other.parameters.keys():
            return False
        return all(
            a.dtype == other.parameters[k].dtype and np.array_equal(a, other.parameters[k])
            for k, a in self.parameters.items()
        )

    def parameter_checksum(self) -> str:
        """Order-independent digest of all parameter bytes; bit-exact."""
        digest = hashlib.sha256()
        for name in sorted(self.parameters):
            arr = self.parameters[name]
            digest.update(name.encode())
            digest.update(str(arr.dtype).encode())
            digest.update(np.ascontiguousarray(arr).tobytes())
        return digest.hexdigest()

    @classmethod
    def from_model(
        cls,
        model: nn.Module,
        spec: EncoderSpec,
        schema: LabelSchema,
        vocabulary: Vocabulary,
        scenario: str = "standard",
        fingerprint: TrainingFingerprint | None = None,
    ) -> "ModelArtifact":
        params = {
            name: tensor.detach().cpu().numpy().copy()
            for name, tensor in model.state_dict().items()
        }
        return cls(
            spec=spec,
            schema=schema,
            vocabulary=vocabulary,
            parameters=params,
            scenario=scenario,
            fingerprint=fingerprint or TrainingFingerprint(0),
        )

    def load_into(self, model: nn.Module) -> nn.Module:
        """Copy stored parameters into a freshly built model, validating names."""
        expected = set(model.state_dict().keys())
        stored = set(self.parameters.keys())
        if expected != stored:
            missing = expected - stored
            extra = stored - expected
            raise ValueError(
                f"parameter set mismatch: missing {sorted(missing)}, unexpected {sorted(extra)}"
            )
        state = {name: torch.from_numpy(arr.copy()) for name, arr in self.parameters.items()}
        model.load_state_dict(state)
        return model


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def save_artifact(artifact: ModelArtifact, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    vocab_bytes = json.dumps(artifact.vocabulary.to_dict(), ensure_ascii=False).encode()
    index = {}
    blobs = {}
    for i, name in enumerate(sorted(artifact.parameters)):
        arr = artifact.parameters[name]
        dtype = str(arr.dtype)
        if dtype not in _DTYPES:
            raise ValueError(f"unsupported parameter dtype {dtype} for {name!r}")
        data = np.ascontiguousarray(arr).astype(_DTYPES[dtype]).tobytes()
        fname = f"params/{i}.bin"
        blobs[fname] = data
        index[name] = {
            "file": fname,
            "dtype": dtype,
            "shape": list(arr.shape),
            "sha256": _sha256(data),
        }
    manifest = {
        "format_version": artifact.format_version,
        "scenario": artifact.scenario,
        "spec": artifact.spec.to_dict(),
        "schema": artifact.schema.to_dict(),
        "fingerprint": artifact.fingerprint.to_dict(),
        "vocab_sha256": _sha256(vocab_bytes),
        "parameters": index,
    }
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("manifest.json", json.dumps(manifest, ensure_ascii=False, indent=1))
        zf.writestr("vocab.json", vocab_bytes)
        for fname, data in blobs.items():
            zf.writestr(fname, data)
    path.write_bytes(buffer.getvalue())


def load_artifact(path: str | Path) -> ModelArtifact:
    path = Path(path)
    try:
        with zipfile.ZipFile(path) as zf:
            manifest = json.loads(zf.read("manifest.json"))
            version = manifest.get("format_version")
            if version != ARTIFACT_FORMAT_VERSION:
                raise ArtifactVersionError(
                    f"artifact format {version} unsupported (expected {ARTIFACT_FORMAT_VERSION})"
                )
            vocab_bytes = zf.read("vocab.json")
            if _sha256(vocab_bytes) != manifest["vocab_sha256"]:
                raise ArtifactChecksumError("vocabulary payload fails checksum")
            parameters = {}
            for name, entry in manifest["parameters"].items():
                data = zf.read(entry["file"])
                if _sha256(data) != entry["sha256"]:
                    raise ArtifactChecksumError(f"parameter {name!r} fails checksum")
                arr = np.frombuffer(data, dtype=_DTYPES[entry["dtype"]]).reshape(entry["shape"])
                parameters[name] = arr.astype(entry["dtype"]).copy()
    except (zipfile.BadZipFile, zlib.error, EOFError) as exc:
        # the archive's own CRC catches raw byte flips before our digests do
        raise ArtifactChecksumError(f"corrupted artifact archive: {exc}") from exc
    return ModelArtifact(
        spec=EncoderSpec.from_dict(manifest["spec"]),
        schema=LabelSchema.from_dict(manifest["schema"]),
        vocabulary=Vocabulary.from_dict(json.loads(vocab_bytes)),
        parameters=parameters,
        scenario=manifest["scenario"],
        format_version=version,
        fingerprint=TrainingFingerprint.from_dict(manifest["fingerprint"]),
    )
