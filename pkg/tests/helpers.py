"""Shared test oracles and fixture builders.

The oracles here deliberately re-implement behavior through a
different route than the library (dense matrices for PageRank, naive
set-based BFS, direct formulas) so agreement is meaningful.
"""

from __future__ import annotations

import random
from datetime import datetime, timezone

from iocgraph.indicators import IndicatorType
from iocgraph.ingest import CrawlerMeta, DocumentDraft, SourceKind, sha256_hex
from iocgraph.store import GraphSnapshot, GraphStore, QueryFilter


def make_draft(
    text: str,
    source_kind: SourceKind = SourceKind.RAW_TEXT,
    crawler_meta: CrawlerMeta | None = None,
    structured=(),
    salt: str = "",
) -> DocumentDraft:
    return DocumentDraft(
        raw_text=text,
        source_kind=source_kind,
        checksum=sha256_hex((salt + text).encode("utf-8")),
        ingested_at=datetime.now(timezone.utc),
        crawler_meta=crawler_meta,
        structured_indicators=tuple(structured),
    )


def commit_synthetic(store: GraphStore, doc_name: str, indicators, source_tag=None):
    """Commit one synthetic document carrying the given (type, value) pairs."""
    meta = None
    kind = SourceKind.RAW_TEXT
    if source_tag is not None:
        meta = CrawlerMeta(url=f"https://src.example/{doc_name}", source_tag=source_tag)
        kind = SourceKind.CRAWLER
    draft = make_draft(f"synthetic document {doc_name}", source_kind=kind, crawler_meta=meta,
                       structured=indicators, salt=doc_name)
    return store.commit_document(draft)


def random_indicator(rng: random.Random, i: int):
    """A canonicalization-valid (type, value) pair of a random type."""
    itype = rng.choice(list(IndicatorType))
    hexdigits = "0123456789abcdef"
    lengths = {IndicatorType.MD5: 32, IndicatorType.SHA1: 40, IndicatorType.SHA256: 64, IndicatorType.SHA512: 128}
    if itype in lengths:
        value = "".join(rng.choice(hexdigits) for _ in range(lengths[itype]))
    elif itype is IndicatorType.CVE:
        value = f"CVE-20{rng.randint(10, 23)}-{1000 + i}"
    elif itype is IndicatorType.TECHNIQUE:
        value = f"T1{100 + i % 900:03d}"
    elif itype is IndicatorType.IP:
        value = f"203.0.{rng.randint(0, 255)}.{i % 256}"
    elif itype is IndicatorType.EMAIL:
        value = f"user{i}@mail.example"
    elif itype is IndicatorType.DOMAIN:
        value = f"host{i}.example"
    elif itype is IndicatorType.PHONE:
        value = f"+1555{1000000 + i}"
    elif itype is IndicatorType.TWITTER:
        value = f"handle_{i}"
    elif itype is IndicatorType.FILENAME:
        value = f"tool{i}.exe"
    else:  # MALWARE / APT
        value = f"family{i}"
    return itype, value


def random_bipartite_store(rng: random.Random, max_docs: int = 12, max_inds: int = 18) -> GraphStore:
    """A random store built through the normal commit path."""
    store = GraphStore()
    n_inds = rng.randint(1, max_inds)
    pool = [random_indicator(rng, i) for i in range(n_inds)]
    n_docs = rng.randint(1, max_docs)
    tags = ["threat_report", "blog", "social", None]
    for d in range(n_docs):
        chosen = rng.sample(pool, rng.randint(1, min(len(pool), 6)))
        commit_synthetic(store, f"doc{d}", chosen, source_tag=rng.choice(tags))
    return store


# ---------------------------------------------------------------------------
# reference BFS oracle


def bfs_oracle(snapshot: GraphSnapshot, seed_id: int, depth: int, qfilter: QueryFilter):
    """Plain set-based BFS with the same filter semantics as the store.

    Returns (included node ids, induced edge set as (doc, ind) pairs,
    frontier ids).
    """

    def node_ok(nid: int) -> bool:
        node = snapshot.node(nid)
        return qfilter.admits_document(node) if hasattr(node, "checksum") else True

    if not node_ok(seed_id):
        return set(), set(), set()
    dist = {seed_id: 0}
    frontier = {seed_id}
    for d in range(1, depth + 1):
        nxt = set()
        for nid in frontier:
            for nbr, edge in snapshot.neighbors(nid).items():
                if nbr in dist:
                    continue
                if not qfilter.admits_edge(edge.label):
                    continue
                if not node_ok(nbr):
                    continue
                nxt.add(nbr)
                dist[nbr] = d
        frontier = nxt
    included = set(dist)
    edges = set()
    for nid in included:
        for nbr, edge in snapshot.neighbors(nid).items():
            if nbr in included and qfilter.admits_edge(edge.label):
                edges.add((edge.document, edge.indicator))
    return included, edges, {nid for nid, d in dist.items() if d == depth}


# ---------------------------------------------------------------------------
# dense PageRank oracle


def pagerank_oracle(snapshot: GraphSnapshot, damping=0.75, max_iterations=300, tolerance=1e-7):
    """Dense numpy power iteration of the non-normalized recurrence."""
    import numpy as np

    ids = snapshot.node_ids()
    index = {nid: i for i, nid in enumerate(ids)}
    n = len(ids)
    adj = np.zeros((n, n))
    for nid in ids:
        for nbr in snapshot.neighbors(nid):
            adj[index[nid], index[nbr]] = 1.0
    deg = adj.sum(axis=1)
    deg_safe = np.where(deg == 0, 1.0, deg)
    scores = np.ones(n)
    for _ in range(max_iterations):
        nxt = (1.0 - damping) + damping * adj.dot(scores / deg_safe)
        if np.max(np.abs(nxt - scores)) < tolerance:
            scores = nxt
            break
        scores = nxt
    return {nid: float(scores[index[nid]]) for nid in ids}
