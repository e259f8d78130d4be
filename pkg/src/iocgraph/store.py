"""Strictly bipartite document/indicator graph with log-based persistence.

Writes are serialized through one lock and appended to a transaction
log (one complete commit per line) before they touch memory, so a
crash at any point replays to either the whole document with all its
edges or nothing. Reads operate on immutable snapshots and never see a
partial commit.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Iterable

from .enrichment import EnrichmentResult, TopicLabel
from .errors import ArgumentError, LoadError, NotFound, StoreError
from .indicators import IndicatorMatch, IndicatorType, canonical_value
from .ingest import AvScanMeta, CrawlerMeta, DocumentDraft, SourceKind
from . import serialize

LOG_VERSION = 1
DEFAULT_NODE_BUDGET = 100_000


@dataclass(frozen=True)
class DocumentNode:
    id: int
    checksum: str
    raw_text: str
    source_kind: SourceKind
    ingested_at: datetime
    crawler_meta: CrawlerMeta | None = None
    avscan_meta: AvScanMeta | None = None
    enrichment: EnrichmentResult | None = None
    match_summary: tuple[tuple[IndicatorType, str, int], ...] = ()

    @property
    def public_id(self) -> str:
        return f"doc:{self.checksum}"

    def effective_timestamp(self) -> datetime:
        """The document's own time when known, else ingestion time."""
        if self.crawler_meta is not None and self.crawler_meta.fetched_at is not None:
            return self.crawler_meta.fetched_at
        if self.avscan_meta is not None and self.avscan_meta.scan_time is not None:
            return self.avscan_meta.scan_time
        return self.ingested_at


@dataclass(frozen=True)
class IndicatorNode:
    id: int
    type: IndicatorType
    value: str

    @property
    def public_id(self) -> str:
        return f"{self.type.value}:{self.value}"


@dataclass(frozen=True)
class GraphEdge:
    document: int
    indicator: int
    label: IndicatorType
    occurrences: int


@dataclass(frozen=True)
class QueryFilter:
    edge_types: frozenset[IndicatorType] | None = None
    language: str | None = None
    topic: TopicLabel | None = None
    source_tags: frozenset[str] | None = None
    time_window: tuple[datetime, datetime] | None = None
    node_budget: int = DEFAULT_NODE_BUDGET

    def __post_init__(self):
        if self.edge_types is not None and not self.edge_types:
            raise ArgumentError("edge_types must be absent (meaning all) or non-empty")
        if self.node_budget < 1:
            raise ArgumentError("node_budget must be positive")

    def admits_edge(self, label: IndicatorType) -> bool:
        return self.edge_types is None or label in self.edge_types

    def admits_document(self, doc: DocumentNode) -> bool:
        if self.language is not None:
            if doc.enrichment is None or doc.enrichment.language.language != self.language:
                return False
        if self.topic is not None:
            if doc.enrichment is None or doc.enrichment.topic is not self.topic:
                return False
        if self.source_tags is not None:
            if doc.crawler_meta is None or doc.crawler_meta.source_tag not in self.source_tags:
                return False
        if self.time_window is not None:
            ts = doc.effective_timestamp()
            lo, hi = self.time_window
            if not lo <= ts <= hi:
                return False
        return True


@dataclass(frozen=True)
class IndicatorSeed:
    type: IndicatorType
    value: str


@dataclass(frozen=True)
class DocumentSeed:
    checksum: str


@dataclass
class SubgraphView:
    seed: int
    nodes: list[DocumentNode | IndicatorNode]
    edges: list[GraphEdge]
    frontier: list[int]
    truncated: bool = False

    def node_map(self) -> dict[int, DocumentNode | IndicatorNode]:
        return {n.id: n for n in self.nodes}


class CommitStatus(Enum):
    COMMITTED = "committed"
    SKIPPED_DUPLICATE = "skipped_duplicate"
    SKIPPED_ZERO_DEGREE = "skipped_zero_degree"


@dataclass(frozen=True)
class CommitOutcome:
    status: CommitStatus
    checksum: str
    doc_id: int | None = None


@dataclass(frozen=True)
class TypeStats:
    nodes: int
    edges: int


@dataclass(frozen=True)
class StatsReport:
    documents: int
    per_type: dict[IndicatorType, TypeStats]

    def total_edges(self) -> int:
        return sum(s.edges for s in self.per_type.values())


def _document_payload(doc: DocumentNode) -> dict:
    return {
        "checksum": doc.checksum,
        "source_kind": doc.source_kind.value,
        "raw_text": doc.raw_text,
        "ingested_at": serialize.dt_to_json(doc.ingested_at),
        "crawler_meta": serialize.crawler_meta_to_json(doc.crawler_meta),
        "avscan_meta": serialize.avscan_meta_to_json(doc.avscan_meta),
        "enrichment": serialize.enrichment_to_json(doc.enrichment),
    }


class GraphSnapshot:
    """Immutable view of the graph at one commit boundary."""

    def __init__(
        self,
        docs: dict[int, DocumentNode],
        inds: dict[int, IndicatorNode],
        doc_by_checksum: dict[str, int],
        ind_by_key: dict[tuple[IndicatorType, str], int],
        adj: dict[int, dict[int, GraphEdge]],
    ):
        self._docs = docs
        self._inds = inds
        self._doc_by_checksum = doc_by_checksum
        self._ind_by_key = ind_by_key
        self._adj = adj

    # -- lookups -------------------------------------------------------------

    def document_count(self) -> int:
        return len(self._docs)

    def documents(self) -> Iterable[DocumentNode]:
        return (self._docs[i] for i in sorted(self._docs))

    def indicators(self) -> Iterable[IndicatorNode]:
        return (self._inds[i] for i in sorted(self._inds))

    def edges(self) -> Iterable[GraphEdge]:
        for doc_id in sorted(self._docs):
            for nbr in sorted(self._adj.get(doc_id, {})):
                yield self._adj[doc_id][nbr]

    def node(self, node_id: int) -> DocumentNode | IndicatorNode:
        n = self._docs.get(node_id) or self._inds.get(node_id)
        if n is None:
            raise NotFound(f"no node with id {node_id}")
        return n

    def node_ids(self) -> list[int]:
        return sorted(self._docs.keys() | self._inds.keys())

    def neighbors(self, node_id: int) -> dict[int, GraphEdge]:
        return self._adj.get(node_id, {})

    def degree(self, node_id: int) -> int:
        return len(self._adj.get(node_id, {}))

    def find_document(self, checksum: str) -> DocumentNode | None:
        doc_id = self._doc_by_checksum.get(checksum.lower())
        return None if doc_id is None else self._docs[doc_id]

    def find_indicator(self, itype: IndicatorType, value: str) -> IndicatorNode | None:
        key = (itype, canonical_value(itype, value))
        ind_id = self._ind_by_key.get(key)
        return None if ind_id is None else self._inds[ind_id]

    def _resolve_seed(self, seed) -> int:
        if isinstance(seed, IndicatorSeed):
            node = self.find_indicator(seed.type, seed.value)
            if node is None:
                raise NotFound(f"indicator {seed.type.value}:{seed.value} not in store")
            return node.id
        if isinstance(seed, DocumentSeed):
            doc = self.find_document(seed.checksum)
            if doc is None:
                raise NotFound(f"document {seed.checksum} not in store")
            return doc.id
        if isinstance(seed, (DocumentNode, IndicatorNode)):
            return seed.id
        if isinstance(seed, int):
            self.node(seed)
            return seed
        raise ArgumentError(f"cannot resolve seed {seed!r}")

    # -- queries ---------------------------------------------------------------

    def _admits(self, node_id: int, qfilter: QueryFilter) -> bool:
        doc = self._docs.get(node_id)
        return True if doc is None else qfilter.admits_document(doc)

    def neighborhood(self, seed, depth: int, qfilter: QueryFilter | None = None) -> SubgraphView:
        """Filtered breadth-first induced subgraph up to ``depth`` hops.

        Filtered-out documents are neither returned nor traversed
        through; edge-type filters restrict both traversal and the
        edges reported between included nodes.
        """
        if depth < 1:
            raise ArgumentError("depth must be >= 1")
        qfilter = qfilter or QueryFilter()
        seed_id = self._resolve_seed(seed)

        included: dict[int, int] = {}   # node id -> hop distance
        truncated = False
        if self._admits(seed_id, qfilter):
            included[seed_id] = 0
            level = [seed_id]
        else:
            level = []
        for dist in range(1, depth + 1):
            next_level = []
            for nid in level:
                for nbr in sorted(self._adj.get(nid, {})):
                    if nbr in included:
                        continue
                    edge = self._adj[nid][nbr]
                    if not qfilter.admits_edge(edge.label):
                        continue
                    if not self._admits(nbr, qfilter):
                        continue
                    if len(included) >= qfilter.node_budget:
                        truncated = True
                        break
                    included[nbr] = dist
                    next_level.append(nbr)
                if truncated:
                    break
            if truncated:
                break
            level = next_level

        nodes = [self.node(nid) for nid in sorted(included)]
        edges = []
        for nid in sorted(included):
            if nid not in self._docs:
                continue
            for nbr in sorted(self._adj.get(nid, {})):
                if nbr in included:
                    edge = self._adj[nid][nbr]
                    if qfilter.admits_edge(edge.label):
                        edges.append(edge)
        frontier = sorted(nid for nid, dist in included.items() if dist == depth)
        return SubgraphView(seed=seed_id, nodes=nodes, edges=edges, frontier=frontier, truncated=truncated)

    def stats(self) -> StatsReport:
        per_type = {}
        for itype in IndicatorType:
            node_ids = [i for i, n in self._inds.items() if n.type is itype]
            edge_count = sum(len(self._adj.get(i, {})) for i in node_ids)
            per_type[itype] = TypeStats(nodes=len(node_ids), edges=edge_count)
        return StatsReport(documents=len(self._docs), per_type=per_type)


class GraphStore:
    """Single-writer, multi-reader bipartite graph store.

    ``path`` names a directory holding the transaction log and
    snapshot; None keeps everything in memory.
    """

    LOG_NAME = "txlog.jsonl"
    SNAPSHOT_NAME = "snapshot.jsonl"

    def __init__(self, path: str | Path | None = None):
        self._lock = threading.Lock()
        self._docs: dict[int, DocumentNode] = {}
        self._inds: dict[int, IndicatorNode] = {}
        self._doc_by_checksum: dict[str, int] = {}
        self._ind_by_key: dict[tuple[IndicatorType, str], int] = {}
        self._adj: dict[int, dict[int, GraphEdge]] = {}
        self._next_id = 1
        self._dir: Path | None = None
        self._log_fp = None
        if path is not None:
            self._dir = Path(path)
            self._dir.mkdir(parents=True, exist_ok=True)
            self._recover()
            self._log_fp = open(self._dir / self.LOG_NAME, "a", encoding="utf-8")
            if (self._dir / self.LOG_NAME).stat().st_size == 0:
                self._log_fp.write(json.dumps({"kind": "header", "version": LOG_VERSION}) + "\n")
                self._log_fp.flush()

    # -- recovery ----------------------------------------------------------

    def _recover(self) -> None:
        snap = self._dir / self.SNAPSHOT_NAME
        if snap.exists():
            self._replay_file(snap, tolerate_torn_tail=False)
        log = self._dir / self.LOG_NAME
        if log.exists():
            self._replay_file(log, tolerate_torn_tail=True)

    def _replay_file(self, path: Path, tolerate_torn_tail: bool) -> None:
        with open(path, "r", encoding="utf-8") as fp:
            lines = fp.read().split("\n")
        last_content = max((i for i, l in enumerate(lines, start=1) if l.strip()), default=0)
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            last = lineno == last_content
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                if tolerate_torn_tail and last:
                    return  # torn write at the tail of the log; drop it
                raise StoreError(f"{path.name}: corrupt record at line {lineno}")
            kind = record.get("kind")
            if kind == "header":
                if record.get("version") != LOG_VERSION:
                    raise StoreError(f"{path.name}: unsupported log version {record.get('version')!r}")
                continue
            if kind != "commit":
                raise StoreError(f"{path.name}: unexpected record kind {kind!r} at line {lineno}")
            try:
                self._apply_commit_record(record)
            except (KeyError, ValueError, LoadError) as exc:
                if tolerate_torn_tail and last:
                    return
                raise StoreError(f"{path.name}: bad commit at line {lineno}: {exc}") from exc

    def _apply_commit_record(self, record: dict) -> None:
        doc = record["doc"]
        matches = [
            (serialize.indicator_type_from_json(t), v, int(occ))
            for t, v, occ in record["matches"]
        ]
        self._apply(
            checksum=doc["checksum"],
            raw_text=doc["raw_text"],
            source_kind=serialize.source_kind_from_json(doc["source_kind"]),
            ingested_at=serialize.dt_from_json(doc["ingested_at"], "ingested_at"),
            crawler_meta=serialize.crawler_meta_from_json(doc.get("crawler_meta")),
            avscan_meta=serialize.avscan_meta_from_json(doc.get("avscan_meta")),
            enrichment=serialize.enrichment_from_json(doc.get("enrichment")),
            matches=matches,
        )

    # -- write path ----------------------------------------------------------

    def _apply(self, checksum, raw_text, source_kind, ingested_at,
               crawler_meta, avscan_meta, enrichment, matches) -> int:
        """Mutate in-memory state with one already-validated commit."""
        doc_id = self._next_id
        self._next_id += 1
        summary = tuple(sorted(matches, key=lambda m: (m[0].value, m[1])))
        doc = DocumentNode(
            id=doc_id,
            checksum=checksum,
            raw_text=raw_text,
            source_kind=source_kind,
            ingested_at=ingested_at,
            crawler_meta=crawler_meta,
            avscan_meta=avscan_meta,
            enrichment=enrichment,
            match_summary=summary,
        )
        self._docs[doc_id] = doc
        self._doc_by_checksum[checksum] = doc_id
        self._adj[doc_id] = {}
        for itype, value, occurrences in summary:
            key = (itype, value)
            ind_id = self._ind_by_key.get(key)
            if ind_id is None:
                ind_id = self._next_id
                self._next_id += 1
                self._inds[ind_id] = IndicatorNode(id=ind_id, type=itype, value=value)
                self._ind_by_key[key] = ind_id
                self._adj[ind_id] = {}
            edge = GraphEdge(document=doc_id, indicator=ind_id, label=itype, occurrences=occurrences)
            self._adj[doc_id][ind_id] = edge
            self._adj[ind_id][doc_id] = edge
        return doc_id

    @staticmethod
    def _merge_matches(
        matches: Iterable[IndicatorMatch],
        structured: Iterable[tuple[IndicatorType, str]],
    ) -> list[tuple[IndicatorType, str, int]]:
        counts: dict[tuple[IndicatorType, str], int] = {}
        for m in matches:
            key = (m.type, canonical_value(m.type, m.value))
            counts[key] = counts.get(key, 0) + m.occurrences
        for itype, value in structured:
            key = (itype, canonical_value(itype, value))
            counts[key] = counts.get(key, 0) + 1
        return [(t, v, n) for (t, v), n in counts.items()]

    def commit_document(
        self,
        draft: DocumentDraft,
        matches: Iterable[IndicatorMatch] = (),
        enrichment: EnrichmentResult | None = None,
    ) -> CommitOutcome:
        """Atomically insert a document, its indicators, and its edges.

        Duplicate checksums and zero-degree documents are skipped; a
        persistence failure aborts the commit with the store unchanged.
        """
        merged = self._merge_matches(matches, draft.structured_indicators)
        with self._lock:
            if draft.checksum in self._doc_by_checksum:
                return CommitOutcome(CommitStatus.SKIPPED_DUPLICATE, draft.checksum)
            if not merged:
                return CommitOutcome(CommitStatus.SKIPPED_ZERO_DEGREE, draft.checksum)
            record = {
                "kind": "commit",
                "doc": {
                    "checksum": draft.checksum,
                    "source_kind": draft.source_kind.value,
                    "raw_text": draft.raw_text,
                    "ingested_at": serialize.dt_to_json(draft.ingested_at),
                    "crawler_meta": serialize.crawler_meta_to_json(draft.crawler_meta),
                    "avscan_meta": serialize.avscan_meta_to_json(draft.avscan_meta),
                    "enrichment": serialize.enrichment_to_json(enrichment),
                },
                "matches": [[t.value, v, n] for t, v, n in sorted(merged, key=lambda m: (m[0].value, m[1]))],
            }
            if self._log_fp is not None:
                try:
                    self._log_fp.write(json.dumps(record, ensure_ascii=False) + "\n")
                    self._log_fp.flush()
                except (OSError, ValueError) as exc:
                    raise StoreError(f"transaction log append failed: {exc}") from exc
            doc_id = self._apply(
                checksum=draft.checksum,
                raw_text=draft.raw_text,
                source_kind=draft.source_kind,
                ingested_at=draft.ingested_at,
                crawler_meta=draft.crawler_meta,
                avscan_meta=draft.avscan_meta,
                enrichment=enrichment,
                matches=[(t, v, n) for t, v, n in merged],
            )
            return CommitOutcome(CommitStatus.COMMITTED, draft.checksum, doc_id=doc_id)

    # -- reads -----------------------------------------------------------------

    def has_checksum(self, checksum: str) -> bool:
        with self._lock:
            return checksum.lower() in self._doc_by_checksum

    def snapshot(self) -> GraphSnapshot:
        with self._lock:
            return GraphSnapshot(
                docs=dict(self._docs),
                inds=dict(self._inds),
                doc_by_checksum=dict(self._doc_by_checksum),
                ind_by_key=dict(self._ind_by_key),
                adj={nid: dict(nbrs) for nid, nbrs in self._adj.items()},
            )

    def find_indicator(self, itype: IndicatorType, value: str) -> IndicatorNode | None:
        return self.snapshot().find_indicator(itype, value)

    def find_document(self, checksum: str) -> DocumentNode | None:
        return self.snapshot().find_document(checksum)

    def neighborhood(self, seed, depth: int, qfilter: QueryFilter | None = None) -> SubgraphView:
        return self.snapshot().neighborhood(seed, depth, qfilter)

    def stats(self) -> StatsReport:
        return self.snapshot().stats()

    # -- maintenance -------------------------------------------------------------

    def compact(self) -> None:
        """Fold the log into a fresh snapshot file and truncate the log."""
        if self._dir is None or self._log_fp is None:
            return
        with self._lock:
            tmp = self._dir / (self.SNAPSHOT_NAME + ".tmp")
            with open(tmp, "w", encoding="utf-8") as fp:
                fp.write(json.dumps({"kind": "header", "version": LOG_VERSION}) + "\n")
                for doc_id in sorted(self._docs):
                    doc = self._docs[doc_id]
                    record = {
                        "kind": "commit",
                        "doc": _document_payload(doc),
                        "matches": [[t.value, v, n] for t, v, n in doc.match_summary],
                    }
                    fp.write(json.dumps(record, ensure_ascii=False) + "\n")
                fp.flush()
                os.fsync(fp.fileno())
            tmp.replace(self._dir / self.SNAPSHOT_NAME)
            self._log_fp.close()
            self._log_fp = open(self._dir / self.LOG_NAME, "w", encoding="utf-8")
            self._log_fp.write(json.dumps({"kind": "header", "version": LOG_VERSION}) + "\n")
            self._log_fp.flush()
            os.fsync(self._log_fp.fileno())

    def close(self) -> None:
        if self._log_fp is not None:
            self._log_fp.flush()
            os.fsync(self._log_fp.fileno())
            self._log_fp.close()
            self._log_fp = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def document_payload(doc: DocumentNode) -> dict:
    """Full JSON payload for one document, match summary included."""
    payload = _document_payload(doc)
    payload["match_summary"] = [[t.value, v, n] for t, v, n in doc.match_summary]
    return payload
