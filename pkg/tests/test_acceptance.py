"""Acceptance criteria, one test per criterion, at the stated tolerances.

The terminal summary prints one PASS/FAIL line per criterion (see
conftest.pytest_terminal_summary).
"""

import io
import json
import random
import socket
import threading
import time
import urllib.request

import numpy as np
import pytest

from iocgraph import extraction
from iocgraph.analytics import (
    CvssVersion,
    DegreeRestriction,
    PageRankParams,
    cvss_correlation,
    load_cvss_feed,
    pagerank,
    pearson,
    top_indicators_by_pagerank,
)
from iocgraph.errors import DegenerateInput
from iocgraph.exports import export_cypher, export_jsonl, load_jsonl
from iocgraph.indicators import IndicatorType
from iocgraph.ingest import SourceKind, parse_av_scan
from iocgraph.pipeline import Engine
from iocgraph.store import GraphStore, IndicatorSeed, QueryFilter

from helpers import (
    bfs_oracle,
    commit_synthetic,
    pagerank_oracle,
    random_bipartite_store,
    random_indicator,
)

WANNACRY_MD5 = "84c82835a5d21bbcf75a61706d8ab549"
CFG = extraction.default_config()


def corpus_engine(corpus_dir, store=None):
    engine = Engine(store or GraphStore())
    engine.ingest_paths([corpus_dir / "raw"], SourceKind.RAW_TEXT)
    engine.ingest_paths([corpus_dir / "crawler"], SourceKind.CRAWLER)
    engine.ingest_paths([corpus_dir / "avscan"], SourceKind.AV_SCAN)
    return engine


def test_extraction_goldens_exact_recovery(corpus_dir, plants):
    started = time.monotonic()
    checked = 0
    for rel, planted in plants["text_files"].items():
        text = (corpus_dir / rel).read_text(encoding="utf-8")
        got = {(m.type.value, m.value) for m in extraction.extract_all(text, CFG)}
        assert got == {(t, v) for t, v in planted}, rel
        checked += 1
    for rel, per_line in plants["crawler_files"].items():
        lines = (corpus_dir / rel).read_text(encoding="utf-8").splitlines()
        for line, planted in zip(lines, per_line):
            body = json.loads(line)["body"]
            got = {(m.type.value, m.value) for m in extraction.extract_all(body, CFG)}
            assert got == {(t, v) for t, v in planted}
            checked += 1
    for rel, per_line in plants["avscan_files"].items():
        lines = (corpus_dir / rel).read_text(encoding="utf-8").splitlines()
        for line, planted in zip(lines, per_line):
            draft = parse_av_scan(line)
            got = {(t.value, v) for t, v in draft.structured_indicators}
            assert got == {(t, v) for t, v in planted}
            checked += 1
    elapsed = time.monotonic() - started
    assert checked == 14
    assert elapsed < 5.0, f"extraction goldens took {elapsed:.2f}s"


def test_bipartite_and_uniqueness_invariants_random_ingest():
    rng = random.Random(1000)
    store = GraphStore()
    pool = [random_indicator(rng, i) for i in range(300)]
    produced = 0
    for d in range(1100):
        indicators = rng.sample(pool, rng.randint(1, 6))
        commit_synthetic(store, f"doc{d}", indicators, source_tag=rng.choice(["blog", None]))
        produced += 1
    assert produced >= 1000
    snap = store.snapshot()
    doc_ids = {d.id for d in snap.documents()}
    ind_ids = {i.id for i in snap.indicators()}
    assert not doc_ids & ind_ids
    edges = list(snap.edges())
    for e in edges:
        assert e.document in doc_ids and e.indicator in ind_ids  # bipartite endpoints only
        assert snap.node(e.indicator).type is e.label
    keys = [(i.type, i.value) for i in snap.indicators()]
    assert len(keys) == len(set(keys)), "duplicate (type,value) nodes"
    checksums = [d.checksum for d in snap.documents()]
    assert len(checksums) == len(set(checksums)), "duplicate checksums"
    pairs = [(e.document, e.indicator) for e in edges]
    assert len(pairs) == len(set(pairs)), "duplicate edges"


def test_dedup_idempotence_full_corpus(corpus_dir):
    engine = corpus_engine(corpus_dir)
    before = engine.store.stats()
    summary = IngestSummaryProxy()
    summary.merge(engine.ingest_paths([corpus_dir / "raw"], SourceKind.RAW_TEXT))
    summary.merge(engine.ingest_paths([corpus_dir / "crawler"], SourceKind.CRAWLER))
    summary.merge(engine.ingest_paths([corpus_dir / "avscan"], SourceKind.AV_SCAN))
    after = engine.store.stats()
    assert summary.committed == 0
    assert summary.duplicates == before.documents
    assert after == before


class IngestSummaryProxy:
    def __init__(self):
        self.committed = 0
        self.duplicates = 0

    def merge(self, summary):
        self.committed += summary.committed
        self.duplicates += summary.duplicates


def test_neighborhood_matches_reference_bfs():
    rng = random.Random(2024)
    graphs = 0
    while graphs < 100:
        store = random_bipartite_store(rng, max_docs=25, max_inds=30)
        snap = store.snapshot()
        ids = snap.node_ids()
        assert len(ids) <= 60
        seed = rng.choice(ids)
        qfilter = QueryFilter(
            edge_types=None if rng.random() < 0.5 else frozenset(rng.sample(list(IndicatorType), 5)),
            source_tags=None if rng.random() < 0.7 else frozenset({"threat_report", "blog"}),
        )
        for depth in (1, 2, 3):
            included, edge_set, frontier = bfs_oracle(snap, seed, depth, qfilter)
            try:
                view = snap.neighborhood(seed, depth, qfilter)
            except Exception:
                assert not included
                continue
            assert {n.id for n in view.nodes} == included
            assert {(e.document, e.indicator) for e in view.edges} == edge_set
            assert set(view.frontier) == frontier
        graphs += 1


def test_pagerank_criteria():
    params = PageRankParams()
    assert params.damping == 0.75 and params.max_iterations == 300

    # Two nodes, one edge: both scores exactly 1 at the fixed point.
    pair = GraphStore()
    commit_synthetic(pair, "d1", [(IndicatorType.MD5, "a" * 32)])
    result = pagerank(pair.snapshot(), PageRankParams(tolerance=1e-10))
    for score in result.scores.values():
        assert abs(score - 1.0) <= 1e-6

    # Star (center + 3 leaves): closed-form 13/7 and 5/7.
    star = GraphStore()
    for name in ("d1", "d2", "d3"):
        commit_synthetic(star, name, [(IndicatorType.CVE, "CVE-2020-0001")])
    snap = star.snapshot()
    scores = pagerank(snap, PageRankParams(tolerance=1e-12)).scores
    center = snap.find_indicator(IndicatorType.CVE, "CVE-2020-0001")
    assert abs(scores[center.id] - 13 / 7) <= 1e-6
    for doc in snap.documents():
        assert abs(scores[doc.id] - 5 / 7) <= 1e-6

    # Random graphs <= 50 nodes against the dense oracle, 1e-6 per node.
    rng = random.Random(77)
    for _ in range(25):
        store = random_bipartite_store(rng, max_docs=18, max_inds=20)
        s = store.snapshot()
        assert len(s.node_ids()) <= 50
        mine = pagerank(s, PageRankParams(tolerance=1e-12, max_iterations=3000)).scores
        oracle = pagerank_oracle(s, tolerance=1e-12, max_iterations=3000)
        for nid, score in mine.items():
            assert abs(score - oracle[nid]) <= 1e-6

    # Table-2 ranking semantics: 5 documents beat 1 document.
    ranked_store = GraphStore()
    for i in range(5):
        commit_synthetic(ranked_store, f"a{i}", [(IndicatorType.CVE, "CVE-2021-7777")])
    commit_synthetic(ranked_store, "b0", [(IndicatorType.CVE, "CVE-2013-1111")])
    s = ranked_store.snapshot()
    ranked = top_indicators_by_pagerank(pagerank(s), s, IndicatorType.CVE, 11)
    assert ranked[0][0] == "CVE-2021-7777"


def test_pearson_criteria():
    assert pearson([1, 2, 3], [2, 4, 6]) == 1.0
    assert abs(pearson([1, 2, 3, 4], [2, 1, 4, 3]) - 0.6) <= 1e-12
    with pytest.raises(DegenerateInput):
        pearson([1, 2, 3], [7, 7, 7])
    rng = np.random.default_rng(811)
    for _ in range(1000):
        n = int(rng.integers(3, 20))
        xs = rng.normal(size=n)
        ys = rng.normal(size=n)
        if np.std(xs) == 0 or np.std(ys) == 0:
            continue
        a = float(rng.uniform(0.1, 5.0)) * (1 if rng.random() < 0.5 else -1)
        b = float(rng.uniform(-10, 10))
        base = pearson(list(xs), list(ys))
        scaled = pearson(list(a * xs + b), list(ys))
        expected = base if a > 0 else -base
        assert abs(scaled - expected) <= 1e-9


def test_cvss_correlation_restrictions():
    store = GraphStore()
    rows = ["cve_id,cvss_v2,cvss_v3,published_year"]
    doc = 0
    noise = [7, 1, 5, 0, 3]
    for i in range(5):
        cve = f"CVE-2021-{1000 + i}"
        rows.append(f"{cve},,{2.0 * (i + 1)},2021")
        for _ in range(i + 1):
            commit_synthetic(store, f"rep{doc}", [(IndicatorType.CVE, cve)], source_tag="threat_report")
            doc += 1
        for _ in range(noise[i]):
            commit_synthetic(store, f"n{doc}", [(IndicatorType.CVE, cve)], source_tag="social")
            doc += 1
    # One degree-1 CVE for the min_degree rule.
    rows.append("CVE-2021-9999,,5.5,2021")
    commit_synthetic(store, "single", [(IndicatorType.CVE, "CVE-2021-9999")], source_tag="threat_report")
    feed = load_cvss_feed(io.StringIO("\n".join(rows)))
    snap = store.snapshot()

    allowlisted = cvss_correlation(
        snap, feed, DegreeRestriction(source_tags=frozenset({"threat_report"}), min_degree=2, cvss_version=CvssVersion.V3)
    )
    assert abs(allowlisted.r - 1.0) <= 1e-9
    assert allowlisted.n == 4  # degree-1 CVEs excluded by the Fig.-11 rule

    unrestricted = cvss_correlation(snap, feed, DegreeRestriction(cvss_version=CvssVersion.V3))
    assert unrestricted.r < 0.9

    without_floor = cvss_correlation(
        snap, feed, DegreeRestriction(source_tags=frozenset({"threat_report"}), cvss_version=CvssVersion.V3)
    )
    assert without_floor.n == 6
    floored = cvss_correlation(
        snap, feed, DegreeRestriction(source_tags=frozenset({"threat_report"}), min_degree=2, cvss_version=CvssVersion.V3)
    )
    assert {p for p in without_floor.points} - {p for p in floored.points} == {(5.5, 1.0), (2.0, 1.0)}


def test_export_round_trip_and_cypher_conventions(corpus_dir):
    engine = corpus_engine(corpus_dir)
    snap = engine.store.snapshot()

    buf = io.StringIO()
    export_jsonl(snap, buf)
    loaded = load_jsonl(io.StringIO(buf.getvalue()))
    assert loaded.stats() == engine.store.stats()
    for itype, value in (
        (IndicatorType.MD5, WANNACRY_MD5),
        (IndicatorType.IP, "89.101.97.139"),
        (IndicatorType.CVE, "CVE-2014-4404"),
        (IndicatorType.SHA256, "84f7c54dc015637a28f06867607c2e0bdd225d10debb1390ff212d91cd2d042b"),
    ):
        a = engine.store.neighborhood(IndicatorSeed(itype, value), 2)
        b = loaded.neighborhood(IndicatorSeed(itype, value), 2)
        key = lambda v: (
            sorted(n.checksum if hasattr(n, "checksum") else f"{n.type.value}:{n.value}" for n in v.nodes),
            sorted((v.node_map()[e.document].checksum, e.label.value, v.node_map()[e.indicator].value, e.occurrences) for e in v.edges),
        )
        assert key(a) == key(b)

    cypher = io.StringIO()
    export_cypher(snap, cypher)
    script = cypher.getvalue()
    assert f"CREATE (:node_md5 {{name: '{WANNACRY_MD5}'}})" in script
    for itype in (IndicatorType.SHA256, IndicatorType.CVE, IndicatorType.IP, IndicatorType.FILENAME):
        assert f":{itype.node_label}" in script
        assert f"-[:{itype.edge_label} " in script


def test_pipeline_routing(corpus_dir):
    engine = corpus_engine(corpus_dir)
    snap = engine.store.snapshot()
    avscan_docs = [d for d in snap.documents() if d.source_kind is SourceKind.AV_SCAN]
    assert len(avscan_docs) == 4
    for doc in avscan_docs:
        assert doc.enrichment is None, "AV scans must never be enriched"
        assert doc.avscan_meta is not None
        summary_keys = {(t, v) for t, v, _ in doc.match_summary}
        # every edge comes from a structured field
        structured = set()
        for kind, value in doc.avscan_meta.file_hashes + doc.avscan_meta.contained_resource_hashes:
            structured.add(value)
        if doc.avscan_meta.scanned_file_name:
            structured.add(doc.avscan_meta.scanned_file_name.lower())
        assert {v for _, v in summary_keys} <= structured
    crawler_docs = [d for d in snap.documents() if d.source_kind is SourceKind.CRAWLER]
    assert crawler_docs
    for doc in crawler_docs:
        assert doc.crawler_meta is not None and doc.crawler_meta.url
        assert doc.crawler_meta.url not in doc.raw_text
        assert doc.enrichment is not None


def test_end_to_end_service(corpus_dir):
    import uvicorn

    from iocgraph.service import create_app

    started = time.monotonic()
    engine = Engine(GraphStore())
    app = create_app(engine)
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 8
    while not server.started and time.time() < deadline:
        time.sleep(0.02)
    base = f"http://127.0.0.1:{port}"

    def post_json(path, payload):
        req = urllib.request.Request(
            base + path, data=json.dumps(payload).encode(), headers={"Content-Type": "application/json"}
        )
        with urllib.request.urlopen(req, timeout=5) as resp:
            return json.loads(resp.read())

    def get_json(path):
        with urllib.request.urlopen(base + path, timeout=5) as resp:
            return json.loads(resp.read())

    try:
        for name in ("wannacry_blog", "manalyzer_report", "imageboard_thread"):
            text = (corpus_dir / "raw" / f"{name}.txt").read_text()
            out = post_json("/v1/documents", {"source_kind": "text", "text": text})
            assert out["status"] == "committed"
        summary = get_json(f"/v1/indicators/md5/{WANNACRY_MD5}")
        assert summary["degree"] == 3
        halo = get_json(f"/v1/indicators/md5/{WANNACRY_MD5}/neighborhood?depth=2")
        types = {n["type"] for n in halo["nodes"] if n["kind"] == "ind"}
        assert "sha1" in types and "sha256" in types
    finally:
        server.should_exit = True
        thread.join(timeout=5)
    elapsed = time.monotonic() - started
    assert elapsed < 10.0, f"end-to-end service check took {elapsed:.2f}s"
