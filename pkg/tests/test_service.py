import json

import pytest
from fastapi.testclient import TestClient

from iocgraph.pipeline import Engine, EngineConfig
from iocgraph.service import create_app
from iocgraph.store import GraphStore

WANNACRY_MD5 = "84c82835a5d21bbcf75a61706d8ab549"


@pytest.fixture()
def client(corpus_dir):
    config = EngineConfig(cvss_feed_path=str(corpus_dir / "cvss.csv"))
    engine = Engine(GraphStore(), config=config)
    return TestClient(create_app(engine))


def post_corpus(client, corpus_dir):
    for name in ("wannacry_blog", "manalyzer_report", "imageboard_thread", "log4j_advisory"):
        text = (corpus_dir / "raw" / f"{name}.txt").read_text()
        r = client.post("/v1/documents", json={"source_kind": "text", "text": text})
        assert r.status_code == 200, r.text
    for name in ("qakbot", "reports_2021"):
        for line in (corpus_dir / "crawler" / f"{name}.jsonl").read_text().splitlines():
            r = client.post("/v1/documents", json={"source_kind": "crawler", "record": json.loads(line)})
            assert r.status_code == 200, r.text
    for line in (corpus_dir / "avscan" / "pe_scans.jsonl").read_text().splitlines():
        r = client.post("/v1/documents", json={"source_kind": "avscan", "record": json.loads(line)})
        assert r.status_code == 200, r.text


class TestIngestEndpoint:
    def test_commit_then_duplicate(self, client):
        body = {"source_kind": "text", "text": "raw doc with CVE-2022-0001 inside"}
        first = client.post("/v1/documents", json=body).json()
        assert first["status"] == "committed" and first["doc_id"] is not None
        second = client.post("/v1/documents", json=body).json()
        assert second["status"] == "skipped_duplicate"
        assert second["checksum"] == first["checksum"]
        stats = client.get("/v1/stats").json()
        assert stats["documents"] == 1

    def test_zero_degree(self, client):
        r = client.post("/v1/documents", json={"source_kind": "text", "text": "hello world"})
        assert r.json()["status"] == "skipped_zero_degree"

    def test_malformed_body(self, client):
        r = client.post("/v1/documents", json={"source_kind": "crawler", "record": {"url": "https://x"}})
        assert r.status_code == 400
        assert r.json()["code"] == "BadRequest"

    def test_unknown_source_kind(self, client):
        r = client.post("/v1/documents", json={"source_kind": "carrier-pigeon", "text": "x"})
        assert r.status_code == 422  # pydantic discriminator rejects pre-handler

    def test_commit_creates_edge(self, client):
        client.post("/v1/documents", json={"source_kind": "text", "text": "fresh CVE-2022-0002 here"})
        stats = client.get("/v1/stats").json()
        assert stats["indicators"]["cve"] == {"nodes": 1, "edges": 1}


class TestIndicatorEndpoints:
    def test_degree_three_md5(self, client, corpus_dir):
        post_corpus(client, corpus_dir)
        r = client.get(f"/v1/indicators/md5/{WANNACRY_MD5}")
        assert r.status_code == 200
        assert r.json() == {"type": "md5", "value": WANNACRY_MD5, "degree": 3}

    def test_lookup_missing(self, client):
        assert client.get("/v1/indicators/md5/" + "0" * 32).status_code == 404

    def test_unknown_type(self, client):
        r = client.get("/v1/indicators/md6/abc")
        assert r.status_code == 400

    def test_neighborhood_depth2_includes_siblings(self, client, corpus_dir, plants):
        post_corpus(client, corpus_dir)
        r = client.get(f"/v1/indicators/md5/{WANNACRY_MD5}/neighborhood?depth=2")
        body = r.json()
        values = {n["value"] for n in body["nodes"] if n["kind"] == "ind"}
        planted = dict(
            (t, v) for t, v in plants["text_files"]["raw/manalyzer_report.txt"]
        )
        assert planted["sha1"] in values and planted["sha256"] in values

    def test_neighborhood_edge_filter(self, client, corpus_dir):
        post_corpus(client, corpus_dir)
        r = client.get("/v1/indicators/ip/89.101.97.139/neighborhood?depth=2&edge_types=ip,malware")
        body = r.json()
        assert body["edges"]
        assert {e["type"] for e in body["edges"]} <= {"ip", "malware"}

    def test_neighborhood_budget_truncates(self, client, corpus_dir):
        post_corpus(client, corpus_dir)
        r = client.get(f"/v1/indicators/md5/{WANNACRY_MD5}/neighborhood?depth=2&budget=3")
        body = r.json()
        assert body["truncated"] is True and len(body["nodes"]) <= 3

    def test_depth_out_of_range(self, client):
        r = client.get(f"/v1/indicators/md5/{WANNACRY_MD5}/neighborhood?depth=9")
        assert r.status_code == 400

    def test_qakbot_halo(self, client, corpus_dir):
        post_corpus(client, corpus_dir)
        r = client.get("/v1/indicators/ip/89.101.97.139/neighborhood?depth=2")
        body = r.json()
        docs = [n for n in body["nodes"] if n["kind"] == "doc"]
        assert len(docs) == 3
        inds = {(n["type"], n["value"]) for n in body["nodes"] if n["kind"] == "ind"}
        assert ("malware", "qakbot") in inds
        assert ("ip", "203.0.113.44") in inds and ("ip", "198.51.100.23") in inds


class TestDocumentEndpoints:
    def test_payload_fidelity(self, client, corpus_dir):
        text = (corpus_dir / "raw" / "wannacry_blog.txt").read_text()
        checksum = client.post("/v1/documents", json={"source_kind": "text", "text": text}).json()["checksum"]
        r = client.get(f"/v1/documents/{checksum}")
        body = r.json()
        assert body["raw_text"] == text
        assert body["enrichment"]["topic"] == "cybersecurity"
        assert body["match_summary"]

    def test_unknown_checksum(self, client):
        assert client.get("/v1/documents/" + "0" * 64).status_code == 404

    def test_avscan_document_no_enrichment(self, client, corpus_dir):
        line = (corpus_dir / "avscan" / "pe_scans.jsonl").read_text().splitlines()[0]
        checksum = client.post(
            "/v1/documents", json={"source_kind": "avscan", "record": json.loads(line)}
        ).json()["checksum"]
        body = client.get(f"/v1/documents/{checksum}").json()
        assert body["enrichment"] is None
        assert body["avscan_meta"]["scanned_file_name"] == "rkinstaller.exe"

    def test_preview_truncation_with_full_fetch(self, corpus_dir):
        config = EngineConfig(preview_length=32)
        engine = Engine(GraphStore(), config=config)
        small = TestClient(create_app(engine))
        text = "start " + "CVE-2022-1234 " + "x" * 200
        checksum = small.post("/v1/documents", json={"source_kind": "text", "text": text}).json()["checksum"]
        r = small.get("/v1/indicators/cve/CVE-2022-1234/neighborhood?depth=1")
        doc_node = next(n for n in r.json()["nodes"] if n["kind"] == "doc")
        assert doc_node["text_truncated"] is True
        assert len(doc_node["raw_text"]) == 32
        assert small.get(f"/v1/documents/{checksum}").json()["raw_text"] == text

    def test_document_neighborhood(self, client, corpus_dir):
        post_corpus(client, corpus_dir)
        text = (corpus_dir / "raw" / "manalyzer_report.txt").read_text()
        import hashlib

        checksum = hashlib.sha256(text.encode()).hexdigest()
        r = client.get(f"/v1/documents/{checksum}/neighborhood?depth=1")
        assert r.status_code == 200
        values = {n["value"] for n in r.json()["nodes"] if n["kind"] == "ind"}
        assert WANNACRY_MD5 in values


class TestAnalyticsEndpoints:
    def test_stats_matches_handcount(self, client, corpus_dir):
        post_corpus(client, corpus_dir)
        stats = client.get("/v1/stats").json()
        assert stats["documents"] == 13
        assert stats["indicators"]["md5"] == {"nodes": 1, "edges": 3}
        assert stats["indicators"]["ip"]["nodes"] == 3

    def test_pagerank_table_shape(self, client, corpus_dir):
        post_corpus(client, corpus_dir)
        r = client.get("/v1/analytics/pagerank?type=cve&k=11")
        body = r.json()
        assert body["damping"] == 0.75 and body["max_iterations"] == 300
        assert [e["rank"] for e in body["results"]] == list(range(1, len(body["results"]) + 1))
        scores = [e["score"] for e in body["results"]]
        assert scores == sorted(scores, reverse=True)
        assert body["results"][0]["value"] == "CVE-2014-4404"

    def test_pagerank_empty_graph(self, client):
        assert client.get("/v1/analytics/pagerank?type=cve&k=5").status_code == 400

    def test_correlation_endpoint(self, client, corpus_dir):
        post_corpus(client, corpus_dir)
        r = client.post(
            "/v1/analytics/cvss-correlation",
            json={"metric": "degree", "cvss_version": "v2", "min_degree": 0},
        )
        assert r.status_code == 200
        body = r.json()
        assert body["n"] >= 2 and -1.0 <= body["r"] <= 1.0
        assert body["config"]["cvss_version"] == "v2"

    def test_correlation_degenerate(self, client, corpus_dir):
        post_corpus(client, corpus_dir)
        r = client.post(
            "/v1/analytics/cvss-correlation",
            json={"metric": "degree", "cvss_version": "v3", "min_degree": 50},
        )
        assert r.status_code == 400
        assert "n=" in r.json()["message"]

    def test_correlation_without_feed(self):
        engine = Engine(GraphStore())
        client = TestClient(create_app(engine))
        r = client.post("/v1/analytics/cvss-correlation", json={"metric": "degree"})
        assert r.status_code == 409
        assert r.json()["code"] == "Conflict"


class TestReplayIdempotence:
    def test_request_log_replay_identical_stats(self, client, corpus_dir):
        post_corpus(client, corpus_dir)
        before = client.get("/v1/stats").json()
        post_corpus(client, corpus_dir)  # replay everything
        after = client.get("/v1/stats").json()
        assert before == after


class TestLimitsAndWindows:
    def test_oversized_document_413(self, corpus_dir):
        config = EngineConfig(max_document_bytes=64)
        engine = Engine(GraphStore(), config=config)
        small = TestClient(create_app(engine))
        r = small.post("/v1/documents", json={"source_kind": "text", "text": "x" * 200})
        assert r.status_code == 413
        assert r.json()["code"] == "TooLarge"

    def test_neighborhood_time_window(self, client, corpus_dir):
        post_corpus(client, corpus_dir)
        # qakbot records were fetched 2022-03-15..18; a window before that excludes them all
        r = client.get(
            "/v1/indicators/ip/89.101.97.139/neighborhood?depth=1"
            "&from=2022-03-16T00:00:00Z&to=2022-03-17T00:00:00Z"
        )
        docs = [n for n in r.json()["nodes"] if n["kind"] == "doc"]
        assert len(docs) == 1  # only the 2022-03-16 record lands inside
        r = client.get(
            "/v1/indicators/ip/89.101.97.139/neighborhood?depth=1&from=2010-01-01T00:00:00Z&to=2010-12-31T00:00:00Z"
        )
        assert [n for n in r.json()["nodes"] if n["kind"] == "doc"] == []
