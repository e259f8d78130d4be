"""Graph serialization: Cypher script, GraphML, and line-delimited JSON.

Exports are deterministic (documents by checksum, indicators by
(type, value), edges by (document, type, value)) and never expose
internal node ids; the jsonl format round-trips through load_jsonl
into an isomorphic store.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Iterator
from xml.sax.saxutils import escape, quoteattr

from .errors import LoadError
from .indicators import IndicatorType
from .store import DocumentNode, GraphSnapshot, GraphStore, document_payload
from . import serialize


def _sorted_docs(snapshot: GraphSnapshot) -> list[DocumentNode]:
    return sorted(snapshot.documents(), key=lambda d: d.checksum)


def _open_dest(destination: str | Path | IO[str]):
    """Path destinations are written via a temp file and atomic rename."""
    if hasattr(destination, "write"):
        return destination, None
    path = Path(destination)
    tmp = path.with_name(path.name + ".tmp")
    return open(tmp, "w", encoding="utf-8"), (tmp, path)


def _finish(fp, rename) -> None:
    if rename is None:
        return
    fp.close()
    tmp, path = rename
    tmp.replace(path)


# ---------------------------------------------------------------------------
# jsonl


def _jsonl_records(snapshot: GraphSnapshot) -> Iterator[dict]:
    for doc in _sorted_docs(snapshot):
        rec = {"kind": "doc"}
        rec.update(document_payload(doc))
        del rec["match_summary"]  # edges are authoritative; avoid double truth
        yield rec
    for ind in sorted(snapshot.indicators(), key=lambda n: (n.type.value, n.value)):
        yield {"kind": "ind", "type": ind.type.value, "value": ind.value}
    id_to_doc = {d.id: d for d in snapshot.documents()}
    id_to_ind = {i.id: i for i in snapshot.indicators()}
    edges = sorted(
        snapshot.edges(),
        key=lambda e: (id_to_doc[e.document].checksum, e.label.value, id_to_ind[e.indicator].value),
    )
    for e in edges:
        yield {
            "kind": "edge",
            "doc": id_to_doc[e.document].checksum,
            "type": e.label.value,
            "value": id_to_ind[e.indicator].value,
            "occ": e.occurrences,
        }


def export_jsonl(snapshot: GraphSnapshot, destination: str | Path | IO[str]) -> None:
    fp, rename = _open_dest(destination)
    for rec in _jsonl_records(snapshot):
        fp.write(json.dumps(rec, ensure_ascii=False) + "\n")
    _finish(fp, rename)


def load_jsonl(source: str | Path | IO[str]) -> GraphStore:
    """Rebuild an in-memory store from an EdgeListJsonl file.

    Aborts with the offending line number on any schema violation;
    refuses input that would break bipartiteness or uniqueness.
    """
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        lines = Path(source).read_text(encoding="utf-8").splitlines()

    docs: dict[str, dict] = {}
    inds: set[tuple[IndicatorType, str]] = set()
    edges: dict[tuple[str, IndicatorType, str], int] = {}
    edge_lines: dict[tuple[str, IndicatorType, str], int] = {}

    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LoadError(f"invalid JSON: {exc.msg}", line=lineno)
        if not isinstance(rec, dict):
            raise LoadError("record must be an object", line=lineno)
        kind = rec.get("kind")
        if kind == "doc":
            checksum = rec.get("checksum")
            if not isinstance(checksum, str) or len(checksum) != 64:
                raise LoadError("doc record needs a 64-char checksum", line=lineno)
            if checksum in docs:
                raise LoadError(f"duplicate document checksum {checksum}", line=lineno)
            if not isinstance(rec.get("raw_text"), str):
                raise LoadError("doc record needs raw_text", line=lineno)
            serialize.source_kind_from_json(rec.get("source_kind"), line=lineno)
            docs[checksum] = rec
        elif kind == "ind":
            itype = serialize.indicator_type_from_json(rec.get("type"), line=lineno)
            value = rec.get("value")
            if not isinstance(value, str) or not value:
                raise LoadError("ind record needs a value", line=lineno)
            key = (itype, value)
            if key in inds:
                raise LoadError(f"duplicate indicator {itype.value}:{value}", line=lineno)
            inds.add(key)
        elif kind == "edge":
            itype = serialize.indicator_type_from_json(rec.get("type"), line=lineno)
            doc_ref = rec.get("doc")
            value = rec.get("value")
            occ = rec.get("occ", 1)
            if not isinstance(doc_ref, str) or not isinstance(value, str):
                raise LoadError("edge record needs doc and value", line=lineno)
            if not isinstance(occ, int) or occ < 1:
                raise LoadError("edge occ must be a positive integer", line=lineno)
            key = (doc_ref, itype, value)
            if key in edges:
                raise LoadError(f"duplicate edge {doc_ref[:12]}…->{itype.value}:{value}", line=lineno)
            edges[key] = occ
            edge_lines[key] = lineno
        else:
            raise LoadError(f"unknown record kind {kind!r}", line=lineno)

    # Endpoint kinds are fixed by the schema: "doc" must name a document
    # checksum, (type, value) an indicator node. Anything else (including
    # any attempt at a document-document edge) fails here.
    for (doc_ref, itype, value), lineno in edge_lines.items():
        if doc_ref not in docs:
            raise LoadError(f"edge references unknown document {doc_ref}", line=lineno)
        if (itype, value) not in inds:
            raise LoadError(f"edge references unknown indicator {itype.value}:{value}", line=lineno)

    by_doc: dict[str, list[tuple[IndicatorType, str, int]]] = {c: [] for c in docs}
    for (doc_ref, itype, value), occ in edges.items():
        by_doc[doc_ref].append((itype, value, occ))
    for checksum, matches in by_doc.items():
        if not matches:
            raise LoadError(f"document {checksum} has no edges (zero-degree)", line=None)

    store = GraphStore()
    for checksum in sorted(docs):
        rec = docs[checksum]
        store._apply(
            checksum=checksum,
            raw_text=rec["raw_text"],
            source_kind=serialize.source_kind_from_json(rec["source_kind"]),
            ingested_at=serialize.dt_from_json(rec.get("ingested_at"), "ingested_at"),
            crawler_meta=serialize.crawler_meta_from_json(rec.get("crawler_meta")),
            avscan_meta=serialize.avscan_meta_from_json(rec.get("avscan_meta")),
            enrichment=serialize.enrichment_from_json(rec.get("enrichment")),
            matches=sorted(by_doc[checksum], key=lambda m: (m[0].value, m[1])),
        )
    return store


# ---------------------------------------------------------------------------
# Cypher


def _cypher_str(value: str) -> str:
    out = value.replace("\\", "\\\\").replace("'", "\\'").replace("\n", "\\n").replace("\r", "\\r")
    return f"'{out}'"


def export_cypher(snapshot: GraphSnapshot, destination: str | Path | IO[str]) -> None:
    """CREATE script reproducing the graph in a Cypher-speaking database.

    Node labels follow the node_<type> convention (node_md5 …) with the
    indicator value in the ``name`` property; edge labels are the
    uppercase type names (MD5, CVE, …).
    """
    fp, rename = _open_dest(destination)
    write = fp.write
    for doc in _sorted_docs(snapshot):
        props = [
            f"checksum: {_cypher_str(doc.checksum)}",
            f"source_kind: {_cypher_str(doc.source_kind.value)}",
            f"text: {_cypher_str(doc.raw_text)}",
        ]
        if doc.enrichment is not None and doc.enrichment.language.language:
            props.append(f"language: {_cypher_str(doc.enrichment.language.language)}")
        if doc.enrichment is not None:
            props.append(f"topic: {_cypher_str(doc.enrichment.topic.value)}")
        write(f"CREATE (:node_document {{{', '.join(props)}}});\n")
    for ind in sorted(snapshot.indicators(), key=lambda n: (n.type.value, n.value)):
        write(f"CREATE (:{ind.type.node_label} {{name: {_cypher_str(ind.value)}}});\n")
    id_to_doc = {d.id: d for d in snapshot.documents()}
    id_to_ind = {i.id: i for i in snapshot.indicators()}
    edges = sorted(
        snapshot.edges(),
        key=lambda e: (id_to_doc[e.document].checksum, e.label.value, id_to_ind[e.indicator].value),
    )
    for e in edges:
        doc = id_to_doc[e.document]
        ind = id_to_ind[e.indicator]
        write(
            f"MATCH (d:node_document {{checksum: {_cypher_str(doc.checksum)}}}), "
            f"(i:{ind.type.node_label} {{name: {_cypher_str(ind.value)}}}) "
            f"CREATE (d)-[:{e.label.edge_label} {{occurrences: {e.occurrences}}}]->(i);\n"
        )
    _finish(fp, rename)


# ---------------------------------------------------------------------------
# GraphML


_GRAPHML_KEYS = (
    ("d_kind", "node", "kind", "string"),
    ("d_checksum", "node", "checksum", "string"),
    ("d_source", "node", "source_kind", "string"),
    ("d_type", "node", "indicator_type", "string"),
    ("d_value", "node", "value", "string"),
    ("e_label", "edge", "label", "string"),
    ("e_occ", "edge", "occurrences", "int"),
)


def export_graphml(snapshot: GraphSnapshot, destination: str | Path | IO[str]) -> None:
    """GraphML document with typed attributes; node ids are public keys."""
    fp, rename = _open_dest(destination)
    write = fp.write
    write('<?xml version="1.0" encoding="UTF-8"?>\n')
    write('<graphml xmlns="http://graphml.graphdrawing.org/xmlns">\n')
    for key_id, domain, name, attr_type in _GRAPHML_KEYS:
        write(f'  <key id="{key_id}" for="{domain}" attr.name="{name}" attr.type="{attr_type}"/>\n')
    write('  <graph id="iocgraph" edgedefault="undirected">\n')
    for doc in _sorted_docs(snapshot):
        write(f"    <node id={quoteattr(doc.public_id)}>\n")
        write("      <data key=\"d_kind\">doc</data>\n")
        write(f"      <data key=\"d_checksum\">{escape(doc.checksum)}</data>\n")
        write(f"      <data key=\"d_source\">{escape(doc.source_kind.value)}</data>\n")
        write("    </node>\n")
    for ind in sorted(snapshot.indicators(), key=lambda n: (n.type.value, n.value)):
        write(f"    <node id={quoteattr(ind.public_id)}>\n")
        write("      <data key=\"d_kind\">ind</data>\n")
        write(f"      <data key=\"d_type\">{escape(ind.type.value)}</data>\n")
        write(f"      <data key=\"d_value\">{escape(ind.value)}</data>\n")
        write("    </node>\n")
    id_to_doc = {d.id: d for d in snapshot.documents()}
    id_to_ind = {i.id: i for i in snapshot.indicators()}
    edges = sorted(
        snapshot.edges(),
        key=lambda e: (id_to_doc[e.document].checksum, e.label.value, id_to_ind[e.indicator].value),
    )
    for e in edges:
        doc = id_to_doc[e.document]
        ind = id_to_ind[e.indicator]
        write(f"    <edge source={quoteattr(doc.public_id)} target={quoteattr(ind.public_id)}>\n")
        write(f"      <data key=\"e_label\">{escape(e.label.edge_label)}</data>\n")
        write(f"      <data key=\"e_occ\">{e.occurrences}</data>\n")
        write("    </edge>\n")
    write("  </graph>\n</graphml>\n")
    _finish(fp, rename)


class ExportFormat:
    CYPHER = "cypher"
    GRAPHML = "graphml"
    JSONL = "jsonl"

    ALL = (CYPHER, GRAPHML, JSONL)


def export(snapshot: GraphSnapshot, fmt: str, destination: str | Path | IO[str]) -> None:
    if fmt == ExportFormat.CYPHER:
        export_cypher(snapshot, destination)
    elif fmt == ExportFormat.GRAPHML:
        export_graphml(snapshot, destination)
    elif fmt == ExportFormat.JSONL:
        export_jsonl(snapshot, destination)
    else:
        raise LoadError(f"unknown export format {fmt!r}")
