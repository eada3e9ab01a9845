"""Declarative descriptions of encoders and label sets."""

from __future__ import annotations

from dataclasses import asdict, dataclass

ENCODER_KINDS = ("cnn", "rnn", "capsule", "gcn", "transformer", "pretrained-adapter")

# Reserved pseudo-label for adaptive-threshold multi-label classification.
THRESHOLD_LABEL = "<threshold>"


@dataclass(frozen=True)
class EncoderSpec:
    """Architecture description; kind-specific settings must match the kind.

    ``position_embedding_dim`` is the per-direction width of the relative
    head/tail distance features used by sentence classification; distances
    are clipped to ``[-max_relative_distance, max_relative_distance]``.
    """

    kind: str
    embedding_dim: int = 32
    hidden_dim: int = 64
    depth: int = 1
    position_embedding_dim: int = 0
    max_relative_distance: int = 30
    # cnn
    kernel_widths: tuple[int, ...] | None = None
    # capsule
    routing_iterations: int | None = None
    num_capsules: int | None = None
    capsule_dim: int | None = None
    # transformer
    num_heads: int | None = None
    ff_dim: int | None = None
    # transformer with visual fusion
    visual_dim: int | None = None
    max_objects: int = 3

    def __post_init__(self):
        if self.kind not in ENCODER_KINDS:
            raise ValueError(f"unknown encoder kind {self.kind!r}")
        for name in ("embedding_dim", "hidden_dim", "depth"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.position_embedding_dim < 0 or self.max_relative_distance < 1:
            raise ValueError("bad position-feature settings")
        if (self.kernel_widths is not None) != (self.kind == "cnn"):
            raise ValueError("kernel_widths is required exactly for kind=cnn")
        capsule_fields = (self.routing_iterations, self.num_capsules, self.capsule_dim)
        if (self.kind == "capsule") != all(v is not None for v in capsule_fields):
            raise ValueError(
                "routing_iterations/num_capsules/capsule_dim are required exactly for kind=capsule"
            )
        if self.kind != "capsule" and any(v is not None for v in capsule_fields):
            raise ValueError("capsule settings given for non-capsule kind")
        if self.kind == "capsule":
            if self.routing_iterations < 1:
                raise ValueError("routing_iterations must be >= 1")
            if self.hidden_dim != self.num_capsules * self.capsule_dim:
                raise ValueError("capsule hidden_dim must equal num_capsules * capsule_dim")
        transformer_fields = (self.num_heads,)
        if (self.kind == "transformer") != all(v is not None for v in transformer_fields):
            raise ValueError("num_heads is required exactly for kind=transformer")
        if self.kind == "transformer" and self.hidden_dim % self.num_heads != 0:
            raise ValueError("hidden_dim must be divisible by num_heads")
        if self.kind != "transformer" and (self.ff_dim is not None or self.visual_dim is not None):
            raise ValueError("ff_dim/visual_dim apply only to kind=transformer")
        if self.kind == "cnn":
            if not self.kernel_widths:
                raise ValueError("kernel_widths must be non-empty")
            if self.hidden_dim % len(self.kernel_widths) != 0:
                raise ValueError("hidden_dim must divide evenly across kernel widths")

    def to_dict(self) -> dict:
        data = asdict(self)
        if data["kernel_widths"] is not None:
            data["kernel_widths"] = list(data["kernel_widths"])
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "EncoderSpec":
        data = dict(data)
        if data.get("kernel_widths") is not None:
            data["kernel_widths"] = tuple(data["kernel_widths"])
        return cls(**data)


def default_spec(kind: str, **overrides) -> EncoderSpec:
    """A reasonable desk-scale spec for each encoder kind."""
    defaults: dict = {"kind": kind}
    if kind == "cnn":
        defaults["kernel_widths"] = (2, 3, 4)
        defaults.setdefault("hidden_dim", 66)
    elif kind == "capsule":
        defaults.update(routing_iterations=3, num_capsules=8, capsule_dim=8, hidden_dim=64)
    elif kind == "transformer":
        defaults.update(num_heads=4)
    defaults.update(overrides)
    return EncoderSpec(**defaults)


@dataclass(frozen=True)
class LabelSchema:
    """Ordered label set for one task; ``negative_label`` marks "no relation"/O."""

    task: str
    labels: tuple[str, ...]
    negative_label: str | None = None

    def __post_init__(self):
        if self.task not in ("ner", "re", "ae"):
            raise ValueError(f"unknown task {self.task!r}")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("labels must be unique")
        if self.negative_label is not None and self.negative_label not in self.labels:
            raise ValueError("negative_label must be one of labels")

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown label {label!r}") from None

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "labels": list(self.labels),
            "negative_label": self.negative_label,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LabelSchema":
        return cls(data["task"], tuple(data["labels"]), data.get("negative_label"))


def bio_tagset(entity_types: tuple[str, ...] | list[str]) -> tuple[str, ...]:
    """O plus B-/I- tags for each entity type, in a stable order."""
    tags = ["O"]
    for etype in entity_types:
        tags.extend((f"B-{etype}", f"I-{etype}"))
    return tuple(tags)


@dataclass(frozen=True)
class TrainingFingerprint:
    seed: int
    config_hash: str = ""

    def to_dict(self) -> dict:
        return {"seed": self.seed, "config_hash": self.config_hash}

    @classmethod
    def from_dict(cls, data: dict) -> "TrainingFingerprint":
        return cls(int(data["seed"]), data.get("config_hash", ""))
