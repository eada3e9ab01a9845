"""Hierarchical configuration composition.

A root YAML file supplies defaults. Its optional ``defaults:`` list names
group files (``- model: cnn`` loads ``<conf_dir>/model/cnn.yaml`` and merges
it under ``model``; a bare string merges at the root). Additional group
files and ``key.path=value`` command-line overrides layer on top with
precedence command-line > group > default. Every leaf remembers which
source set it.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Iterable

import yaml

from kextract.errors import ConfigError


class ConfigNode:
    """Composed configuration tree with dot-path access and leaf provenance."""

    def __init__(self, data: dict, provenance: dict[str, tuple[str, str]] | None = None):
        self._data = data
        self._provenance = provenance or {}

    @classmethod
    def wrap(cls, value: "ConfigNode | dict | None") -> "ConfigNode":
        if isinstance(value, ConfigNode):
            return value
        return cls(dict(value or {}))

    def get(self, path: str, default: Any = ...) -> Any:
        node: Any = self._data
        for part in path.split("."):
            if not isinstance(node, dict) or part not in node:
                if default is ...:
                    raise KeyError(path)
                return default
            node = node[part]
        return node

    def provenance(self, path: str) -> tuple[str, str]:
        if path not in self._provenance:
            raise KeyError(path)
        return self._provenance[path]

    def leaves(self) -> list[str]:
        found: list[str] = []

        def walk(node, prefix):
            if isinstance(node, dict):
                for key, value in node.items():
                    walk(value, f"{prefix}.{key}" if prefix else str(key))
            else:
                found.append(prefix)

        walk(self._data, "")
        return found

    def to_dict(self) -> dict:
        return _deep_copy(self._data)

    def __contains__(self, path: str) -> bool:
        return self.get(path, None) is not None or path in self._provenance


def _deep_copy(node):
    if isinstance(node, dict):
        return {k: _deep_copy(v) for k, v in node.items()}
    if isinstance(node, list):
        return [_deep_copy(v) for v in node]
    return node


def _load_yaml(path: Path) -> dict:
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def _merge(
    base: dict,
    incoming: dict,
    source: tuple[str, str],
    provenance: dict[str, tuple[str, str]],
    prefix: str = "",
) -> None:
    for key, value in incoming.items():
        path = f"{prefix}.{key}" if prefix else str(key)
        if key in base and isinstance(base[key], dict) != isinstance(value, dict):
            old = provenance.get(path) or next(
                (v for k, v in provenance.items() if k.startswith(path + ".")),
                ("default", "an earlier source"),
            )
            raise ConfigError(
                f"cannot merge {path!r}: scalar/subtree conflict between "
                f"{old[1]} and {source[1]}"
            )
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value, source, provenance, path)
        elif isinstance(value, dict):
            base[key] = {}
            _merge(base[key], value, source, provenance, path)
        else:
            base[key] = _deep_copy(value)
            provenance[path] = source


def parse_override(token: str) -> tuple[str, Any]:
    if "=" not in token:
        raise ConfigError(f"override {token!r} must look like key.path=value")
    key, raw = token.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"override {token!r} has an empty key")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError:
        value = raw
    return key, value


def _apply_override(data: dict, key: str, value, provenance) -> None:
    parts = key.split(".")
    node = data
    for part in parts[:-1]:
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"unknown override key {key!r}")
        node = node[part]
    last = parts[-1]
    if not isinstance(node, dict) or last not in node:
        raise ConfigError(f"unknown override key {key!r}")
    if isinstance(node[last], dict):
        raise ConfigError(f"override {key!r} targets a subtree, not a value")
    node[last] = value
    provenance[key] = ("command-line", key)


def compose_config(
    default_file: str | Path,
    group_files: Iterable[str | Path] = (),
    overrides: Iterable[str] = (),
) -> ConfigNode:
    default_file = Path(default_file)
    conf_dir = default_file.parent
    provenance: dict[str, tuple[str, str]] = {}
    data: dict = {}
    root = _load_yaml(default_file)
    defaults_list = root.pop("defaults", [])
    _merge(data, root, ("default", str(default_file)), provenance)

    if not isinstance(defaults_list, list):
        raise ConfigError(f"{default_file}: 'defaults' must be a list")
    for entry in defaults_list:
        if isinstance(entry, dict):
            if len(entry) != 1:
                raise ConfigError(f"{default_file}: bad defaults entry {entry!r}")
            group, name = next(iter(entry.items()))
            path = conf_dir / str(group) / f"{name}.yaml"
            _merge(
                data,
                {str(group): _load_yaml(path)},
                ("group", str(path)),
                provenance,
            )
        else:
            path = conf_dir / f"{entry}.yaml"
            _merge(data, _load_yaml(path), ("group", str(path)), provenance)

    for gf in group_files:
        gf = Path(gf)
        _merge(data, _load_yaml(gf), ("group", str(gf)), provenance)

    for token in overrides:
        key, value = parse_override(token)
        _apply_override(data, key, value, provenance)

    return ConfigNode(data, provenance)
