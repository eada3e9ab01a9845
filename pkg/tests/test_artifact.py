import json
import zipfile

import numpy as np
import pytest
import torch

from kextract.dataio import build_vocab
from kextract.errors import ArtifactChecksumError, ArtifactVersionError
from kextract.models import (
    LabelSchema,
    ModelArtifact,
    SentenceClassifier,
    TrainingFingerprint,
    default_spec,
    load_artifact,
    save_artifact,
)
from kextract.models.factory import build_model, instantiate


@pytest.fixture
def artifact():
    vocab = build_vocab([["alpha", "beta", "gamma"]])
    spec = default_spec("cnn", hidden_dim=12, kernel_widths=(3,), position_embedding_dim=2)
    schema = LabelSchema("re", ("r1", "r2"), negative_label=None)
    model = build_model(spec, schema, vocab, seed=5)
    return ModelArtifact.from_model(
        model, spec, schema, vocab, fingerprint=TrainingFingerprint(5, "abc")
    )


def test_round_trip_equality(tmp_path, artifact):
    path = tmp_path / "model.kex"
    save_artifact(artifact, path)
    loaded = load_artifact(path)
    assert loaded == artifact
    for name, arr in artifact.parameters.items():
        assert loaded.parameters[name].dtype == arr.dtype
        assert np.array_equal(loaded.parameters[name], arr)


def test_version_mismatch(tmp_path, artifact):
    path = tmp_path / "model.kex"
    save_artifact(artifact, path)
    with zipfile.ZipFile(path) as zf:
        manifest = json.loads(zf.read("manifest.json"))
        rest = {n: zf.read(n) for n in zf.namelist() if n != "manifest.json"}
    manifest["format_version"] += 1
    with zipfile.ZipFile(path, "w") as zf:
        zf.writestr("manifest.json", json.dumps(manifest))
        for name, data in rest.items():
            zf.writestr(name, data)
    with pytest.raises(ArtifactVersionError):
        load_artifact(path)


def test_tampered_parameter_fails_checksum(tmp_path, artifact):
    path = tmp_path / "model.kex"
    save_artifact(artifact, path)
    with zipfile.ZipFile(path) as zf:
        contents = {n: zf.read(n) for n in zf.namelist()}
    victims = [n for n in contents if n.startswith("params/")]
    payload = bytearray(contents[victims[0]])
    payload[0] ^= 0xFF
    contents[victims[0]] = bytes(payload)
    with zipfile.ZipFile(path, "w") as zf:
        for name, data in contents.items():
            zf.writestr(name, data)
    with pytest.raises(ArtifactChecksumError):
        load_artifact(path)


def test_raw_byte_flip_fails_checksum(tmp_path, artifact):
    path = tmp_path / "model.kex"
    save_artifact(artifact, path)
    blob = bytearray(path.read_bytes())
    blob[len(blob) // 2] ^= 0x01
    path.write_bytes(bytes(blob))
    with pytest.raises(ArtifactChecksumError):
        load_artifact(path)


def test_instantiate_round_trip(tmp_path, artifact):
    path = tmp_path / "model.kex"
    save_artifact(artifact, path)
    model = instantiate(load_artifact(path))
    assert isinstance(model, SentenceClassifier)
    ids = torch.tensor([[5, 6, 7]])
    mask = torch.ones(1, 3, dtype=torch.long)
    out = model(ids, mask, torch.tensor([0]), torch.tensor([2]))
    assert out.shape == (1, 2)


def test_parameter_name_mismatch_rejected(artifact):
    bad = dict(artifact.parameters)
    bad["ghost"] = np.zeros(3, dtype="float32")
    broken = ModelArtifact(
        spec=artifact.spec,
        schema=artifact.schema,
        vocabulary=artifact.vocabulary,
        parameters=bad,
        scenario=artifact.scenario,
    )
    model = build_model(artifact.spec, artifact.schema, artifact.vocabulary)
    with pytest.raises(ValueError):
        broken.load_into(model)


def test_checksum_stability(artifact):
    assert artifact.parameter_checksum() == artifact.parameter_checksum()
    other = ModelArtifact(
        spec=artifact.spec,
        schema=artifact.schema,
        vocabulary=artifact.vocabulary,
        parameters={k: v.copy() for k, v in artifact.parameters.items()},
        scenario=artifact.scenario,
        fingerprint=artifact.fingerprint,
    )
    assert other.parameter_checksum() == artifact.parameter_checksum()
