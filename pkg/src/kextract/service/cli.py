"""Command-line entry points: run (train + validate), predict, serve."""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from kextract.core.config import ConfigNode, compose_config
from kextract.core.engine import new_artifact, predict, train, validate
from kextract.dataio import (
    AttributeRecord,
    RelationRecord,
    parse_attribute_csv,
    parse_bio,
    parse_document_corpus,
    parse_fewshot_records,
    parse_relation_csv,
)
from kextract.docre.pipeline import docre_schema
from kextract.errors import KextractError, ValidationError
from kextract.models.artifact import load_artifact, save_artifact
from kextract.models.spec import EncoderSpec, LabelSchema, bio_tagset
from kextract.dataio.vocab import build_vocab
from kextract.service.app import serve as run_server
from kextract.service.registry import load_registry

TASKS = ("ner", "re", "ae")
SCENARIOS = ("standard", "document", "fewshot", "multimodal")
SUPPORTED = {
    ("ner", "standard"),
    ("re", "standard"),
    ("ae", "standard"),
    ("re", "document"),
    ("ner", "multimodal"),
    ("re", "multimodal"),
    ("re", "fewshot"),
    ("ner", "fewshot"),
}


def default_config_path() -> Path:
    return Path(str(resources.files("kextract") / "conf" / "config.yaml"))


def spec_from_config(kind: str, cfg: ConfigNode, num_labels: int) -> EncoderSpec:
    enc = lambda key, fallback: cfg.get(f"encoder.{key}", fallback)
    common = {
        "embedding_dim": int(enc("embedding_dim", 32)),
        "hidden_dim": int(enc("hidden_dim", 64)),
        "depth": int(enc("depth", 1)),
        "position_embedding_dim": int(enc("position_embedding_dim", 0)),
        "max_relative_distance": int(enc("max_relative_distance", 30)),
    }
    if kind == "cnn":
        widths = tuple(int(w) for w in enc("kernel_widths", [2, 3, 4]))
        hidden = common["hidden_dim"]
        common["hidden_dim"] = hidden - hidden % len(widths)
        return EncoderSpec(kind="cnn", kernel_widths=widths, **common)
    if kind == "capsule":
        capsule_dim = int(enc("capsule_dim", 8))
        common["hidden_dim"] = num_labels * capsule_dim
        return EncoderSpec(
            kind="capsule",
            routing_iterations=int(enc("routing_iterations", 3)),
            num_capsules=num_labels,
            capsule_dim=capsule_dim,
            **common,
        )
    if kind == "transformer":
        ff = int(enc("ff_dim", 0)) or None
        visual = int(enc("visual_dim", 0)) or None
        return EncoderSpec(
            kind="transformer",
            num_heads=int(enc("num_heads", 4)),
            ff_dim=ff,
            visual_dim=visual,
            max_objects=int(enc("max_objects", 3)),
            **common,
        )
    return EncoderSpec(kind=kind, **common)


def _load_split(task: str, scenario: str, data_dir: Path, split: str):
    suffix = {
        ("ner", "standard"): (".bio", parse_bio),
        ("ner", "fewshot"): (".bio", parse_bio),
        ("ner", "multimodal"): (".bio", parse_bio),
        ("re", "standard"): (".csv", parse_relation_csv),
        ("ae", "standard"): (".csv", parse_attribute_csv),
        ("re", "document"): (".jsonl", parse_document_corpus),
        ("re", "fewshot"): (".jsonl", parse_fewshot_records),
        ("re", "multimodal"): (".jsonl", parse_fewshot_records),
    }[(task, scenario)]
    path = data_dir / f"{split}{suffix[0]}"
    if not path.exists():
        return None
    return suffix[1](path.read_text(encoding="utf-8"))


def _attach_bundles(records, data_dir: Path):
    from kextract.multimodal.features import read_feature_file

    bin_path, idx_path = data_dir / "features.bin", data_dir / "features.idx"
    if not bin_path.exists():
        return [(r, None) for r in records]
    bundles = read_feature_file(bin_path, idx_path)
    return [(r, bundles.get(str(i))) for i, r in enumerate(records)]


def _derive_schema(task: str, scenario: str, records, negative: str) -> LabelSchema:
    if task == "ner":
        types = sorted({t for r in records for _a, _b, t in r.entity_spans()})
        return LabelSchema("ner", bio_tagset(types))
    if scenario == "document":
        relations = sorted({l.relation for doc in records for l in doc.relation_labels})
        return docre_schema(relations)
    if task == "ae":
        labels = sorted({r.attribute for r in records})
    else:
        labels = sorted({r.relation for r in records})
    return LabelSchema(task, tuple(labels), negative_label=negative or None)


def _tokens_of(task: str, scenario: str, record) -> list[str]:
    from kextract.models.embedding import resolve_mention_tokens

    if task == "ner" or scenario == "fewshot" or scenario == "multimodal":
        base = record[0] if isinstance(record, tuple) else record
        return list(base.tokens)
    if scenario == "document":
        return [t for sent in record.sentences for t in sent]
    tokens, _h, _t = resolve_mention_tokens(record, mode="repair")
    return tokens


def cli_run(args, overrides: list[str]) -> int:
    if (args.task, args.scenario) not in SUPPORTED:
        print(
            f"error: unsupported task/scenario {args.task} {args.scenario}; "
            f"supported: {sorted(SUPPORTED)}",
            file=sys.stderr,
        )
        return 2
    conf = Path(args.conf) if args.conf else default_config_path()
    cfg = compose_config(conf, group_files=args.group or (), overrides=overrides)
    data_dir = Path(cfg.get("data.dir"))
    if not data_dir.is_dir():
        print(f"error: data directory not found: {data_dir}", file=sys.stderr)
        return 1
    train_records = _load_split(args.task, args.scenario, data_dir, "train")
    if not train_records:
        print(f"error: no train split in {data_dir}", file=sys.stderr)
        return 1
    valid_records = _load_split(args.task, args.scenario, data_dir, "valid")
    schema = _derive_schema(
        args.task, args.scenario, train_records, cfg.get("data.negative_label", "")
    )
    if args.scenario == "multimodal":
        train_records = _attach_bundles(train_records, data_dir)
        if valid_records:
            valid_records = _attach_bundles(valid_records, data_dir)
    corpus = [_tokens_of(args.task, args.scenario, r) for r in train_records]
    vocab = build_vocab(corpus)
    kind = cfg.get("model")
    spec = spec_from_config(kind, cfg, len(schema))
    seed = int(cfg.get("train.seed", 0))
    config = dict(cfg.to_dict())
    config["language"] = cfg.get("data.language", "english")
    config["offset_mode"] = cfg.get("data.offset_mode", "strict")
    if not int(cfg.get("train.patience", 0) or 0):
        config.setdefault("train", {})["patience"] = None

    artifact = new_artifact(spec, schema, vocab, scenario=args.scenario, seed=seed)
    try:
        artifact, history = train(artifact, train_records, config, val_dataset=valid_records)
    except KextractError as exc:
        print(f"error: training failed: {exc}", file=sys.stderr)
        return 1
    report = validate(artifact, valid_records or train_records, config)

    out_dir = Path(cfg.get("output.dir"))
    out_dir.mkdir(parents=True, exist_ok=True)
    artifact_path = out_dir / f"{args.task}_{args.scenario}_{kind}.kex"
    save_artifact(artifact, artifact_path)
    with (out_dir / "history.jsonl").open("w", encoding="utf-8") as fh:
        for row in history:
            fh.write(json.dumps(row) + "\n")
    print(json.dumps({
        "artifact": str(artifact_path),
        "epochs": len(history),
        "f1": report.f1,
        "precision": report.precision,
        "recall": report.recall,
    }))
    return 0


def _parse_predict_input(artifact, raw: str):
    task, scenario = artifact.schema.task, artifact.scenario
    if raw.startswith("@"):
        raw = Path(raw[1:]).read_text(encoding="utf-8")
    if scenario == "document":
        docs = parse_document_corpus(raw)
        if not docs:
            raise ValidationError("no document records in input")
        return docs[0]
    if task in ("re", "ae") and scenario == "fewshot":
        return parse_fewshot_records(raw)[0]
    if task in ("re", "ae"):
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ValidationError(
                f"{task} prediction needs a JSON record with mention offsets, "
                f"not a bare sentence"
            ) from exc
        cls = RelationRecord if task == "re" else AttributeRecord
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ValidationError(f"bad {task} record: {exc}") from exc
    return raw  # ner: a plain sentence


def cli_predict(args) -> int:
    artifact = load_artifact(args.artifact)
    item = _parse_predict_input(artifact, args.input)
    result = predict(artifact, item, {"language": args.language, "offset_mode": "repair"})
    for line in prediction_lines(result):
        print(line)
    return 0


def prediction_lines(result) -> list[str]:
    rows = result if isinstance(result, list) else [result]
    return [json.dumps(row, ensure_ascii=False) for row in rows]


def read_predictions(text: str) -> list[dict]:
    """Parse cli_predict output back into records (round trip)."""
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def cli_serve(args) -> int:
    import yaml

    config = yaml.safe_load(Path(args.config).read_text(encoding="utf-8"))
    registry = load_registry(config["registry"])
    artifacts = {task: load_artifact(path) for task, path in config["artifacts"].items()}
    run_server(artifacts, registry, port=int(config.get("port", 8080)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kextract", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="train and validate a model")
    run_p.add_argument("task", choices=TASKS)
    run_p.add_argument("scenario", choices=SCENARIOS)
    run_p.add_argument("overrides", nargs="*", help="key.path=value config overrides")
    run_p.add_argument("--conf", help="root config file (defaults to the packaged one)")
    run_p.add_argument("--group", action="append", help="extra group config file")

    pred_p = sub.add_parser("predict", help="run one input through an artifact")
    pred_p.add_argument("artifact")
    pred_p.add_argument("input", help="sentence, JSON record, or @file")
    pred_p.add_argument("--language", default="english")

    serve_p = sub.add_parser("serve", help="serve loaded artifacts over HTTP")
    serve_p.add_argument("config", help="YAML: artifacts per task, registry, port")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cli_run(args, args.overrides)
        if args.command == "predict":
            return cli_predict(args)
        return cli_serve(args)
    except (KextractError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
