"""Knowledge-graph export: node-link records and DOT text.

Nodes deduplicate by (text, type); each triple contributes one edge labeled
by its relation. Output is sorted, so any permutation of the same triples
serializes byte-identically.
"""

from __future__ import annotations

from kextract.service.registry import Triple


def _node_id(text: str, etype: str) -> str:
    return f"{text}::{etype}"


def export_graph(triples: list[Triple]) -> dict:
    """Node-link document: {"nodes": [...], "links": [...]}, deterministic."""
    nodes = {}
    for t in triples:
        for text, etype in (t.head, t.tail):
            nodes[_node_id(text, etype)] = {"id": _node_id(text, etype), "text": text, "type": etype}
    links = [
        {
            "source": _node_id(*t.head),
            "target": _node_id(*t.tail),
            "relation": t.relation,
            "confidence": t.confidence,
        }
        for t in triples
    ]
    links.sort(key=lambda l: (l["source"], l["relation"], l["target"], -l["confidence"]))
    return {
        "nodes": [nodes[k] for k in sorted(nodes)],
        "links": links,
    }


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(triples: list[Triple]) -> str:
    """Syntactically valid DOT digraph, sorted nodes then sorted edges."""
    doc = export_graph(triples)
    lines = ["digraph extraction {"]
    for node in doc["nodes"]:
        label = f"{node['text']} ({node['type']})"
        lines.append(f"  {_quote(node['id'])} [label={_quote(label)}];")
    for link in doc["links"]:
        lines.append(
            f"  {_quote(link['source'])} -> {_quote(link['target'])} "
            f"[label={_quote(link['relation'])}];"
        )
    lines.append("}")
    return "".join(l + "\n" for l in lines)
