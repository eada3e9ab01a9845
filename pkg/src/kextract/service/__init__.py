"""CLI, HTTP extraction endpoint, schema registry, graph export."""

from kextract.service.app import ExtractionRequest, ExtractionService, build_app, serve
from kextract.service.graph_export import export_dot, export_graph
from kextract.service.registry import (
    RelationType,
    SchemaRegistry,
    Triple,
    filter_by_schema,
    load_registry,
    parse_registry,
    serialize_registry,
)

__all__ = [
    "ExtractionRequest",
    "ExtractionService",
    "RelationType",
    "SchemaRegistry",
    "Triple",
    "build_app",
    "export_dot",
    "export_graph",
    "filter_by_schema",
    "load_registry",
    "parse_registry",
    "serialize_registry",
    "serve",
]
