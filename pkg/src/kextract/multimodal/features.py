"""Precomputed visual feature files.

Byte layout: ``<name>.bin`` is raw little-endian float32, C order. The text
index ``<name>.idx`` starts with a header line

    kexvis v1 dim=<d_v> sha256=<hex digest of the .bin bytes>

followed by one line per bundle: ``<source_id> <float offset> <m>``. A
bundle occupies (1 + m) * d_v consecutive floats: the global feature first,
then the m object features in file order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from kextract.errors import ArtifactChecksumError, ParseError


@dataclass(frozen=True)
class VisualFeatureBundle:
    source_id: str
    global_feature: np.ndarray
    objects: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.float32))

    def __post_init__(self):
        if self.global_feature.ndim != 1:
            raise ValueError("global feature must be a vector")
        objects = self.objects
        if objects.size and objects.shape[-1] != self.global_feature.shape[0]:
            raise ValueError("object features must share the global feature's dim")
        if not np.isfinite(self.global_feature).all() or (
            objects.size and not np.isfinite(objects).all()
        ):
            raise ValueError("visual features must be finite")

    @property
    def dim(self) -> int:
        return self.global_feature.shape[0]

    @property
    def num_objects(self) -> int:
        return self.objects.shape[0] if self.objects.size else 0

    def rows(self, max_objects: int | None = None) -> np.ndarray:
        """(1 + m, d_v): global first, objects truncated in file order."""
        m = self.num_objects
        if max_objects is not None:
            m = min(m, max_objects)
        if m == 0:
            return self.global_feature[None, :]
        return np.concatenate([self.global_feature[None, :], self.objects[:m]], axis=0)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, VisualFeatureBundle)
            and self.source_id == other.source_id
            and np.array_equal(self.global_feature, other.global_feature)
            and self.num_objects == other.num_objects
            and (self.num_objects == 0 or np.array_equal(self.objects, other.objects))
        )


def write_feature_file(
    bundles: list[VisualFeatureBundle], bin_path: str | Path, index_path: str | Path
) -> None:
    bin_path, index_path = Path(bin_path), Path(index_path)
    if not bundles:
        raise ValueError("no bundles to write")
    dim = bundles[0].dim
    chunks = []
    lines = []
    offset = 0
    for bundle in bundles:
        if bundle.dim != dim:
            raise ValueError("all bundles in one file must share d_v")
        rows = bundle.rows().astype("<f4")
        chunks.append(rows.tobytes(order="C"))
        lines.append(f"{bundle.source_id} {offset} {bundle.num_objects}")
        offset += rows.size
    payload = b"".join(chunks)
    digest = hashlib.sha256(payload).hexdigest()
    bin_path.write_bytes(payload)
    index_path.write_text(
        f"kexvis v1 dim={dim} sha256={digest}\n" + "".join(l + "\n" for l in lines),
        encoding="utf-8",
    )


def read_feature_file(
    bin_path: str | Path, index_path: str | Path
) -> dict[str, VisualFeatureBundle]:
    bin_path, index_path = Path(bin_path), Path(index_path)
    lines = index_path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError("empty feature index", line=1)
    header = lines[0].split()
    if len(header) != 4 or header[0] != "kexvis" or header[1] != "v1":
        raise ParseError(f"bad feature index header {lines[0]!r}", line=1)
    try:
        dim = int(header[2].removeprefix("dim="))
        expected = header[3].removeprefix("sha256=")
    except ValueError as exc:
        raise ParseError(f"bad feature index header {lines[0]!r}", line=1) from exc
    payload = bin_path.read_bytes()
    if hashlib.sha256(payload).hexdigest() != expected:
        raise ArtifactChecksumError(f"{bin_path} fails its index checksum")
    floats = np.frombuffer(payload, dtype="<f4")
    bundles: dict[str, VisualFeatureBundle] = {}
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            source_id, offset_s, m_s = line.split()
            offset, m = int(offset_s), int(m_s)
        except ValueError as exc:
            raise ParseError(f"bad index row {line!r}", line=line_no) from exc
        need = (1 + m) * dim
        if offset + need > floats.size:
            raise ParseError(f"row {source_id!r} overruns the payload", line=line_no)
        block = floats[offset : offset + need].reshape(1 + m, dim)
        bundles[source_id] = VisualFeatureBundle(
            source_id=source_id,
            global_feature=block[0].astype(np.float32),
            objects=block[1:].astype(np.float32).copy()
            if m
            else np.zeros((0, 0), dtype=np.float32),
        )
    return bundles
