"""Capture /v1 responses for the explorer UI's vitest fixtures.

Run from the repo root: python scripts/capture_ui_fixtures.py
Loads the md5 scenario corpus into a fresh engine and freezes the
responses the UI tests replay.
"""

import hashlib
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "frontend" / "test" / "fixtures"

WANNACRY_MD5 = "84c82835a5d21bbcf75a61706d8ab549"


def main():
    sys.path.insert(0, str(ROOT / "src"))
    from fastapi.testclient import TestClient

    from iocgraph.pipeline import Engine
    from iocgraph.service import create_app
    from iocgraph.store import GraphStore

    engine = Engine(GraphStore())
    client = TestClient(create_app(engine))

    checksums = {}
    for name in ("wannacry_blog", "manalyzer_report", "imageboard_thread"):
        text = (ROOT / "corpus" / "raw" / f"{name}.txt").read_text(encoding="utf-8")
        resp = client.post("/v1/documents", json={"source_kind": "text", "text": text})
        assert resp.json()["status"] == "committed", (name, resp.text)
        checksums[name] = hashlib.sha256(text.encode()).hexdigest()

    OUT.mkdir(parents=True, exist_ok=True)

    def save(name, resp):
        assert resp.status_code in (200, 404), (name, resp.status_code, resp.text)
        (OUT / f"{name}.json").write_text(json.dumps(resp.json(), indent=2) + "\n", encoding="utf-8")

    save("search_md5", client.get(f"/v1/indicators/md5/{WANNACRY_MD5}/neighborhood?depth=1"))
    save("search_md5_cyber", client.get(
        f"/v1/indicators/md5/{WANNACRY_MD5}/neighborhood?depth=1&topic=cybersecurity"
    ))
    save("indicator_md5", client.get(f"/v1/indicators/md5/{WANNACRY_MD5}"))
    save("expand_manalyzer", client.get(f"/v1/documents/{checksums['manalyzer_report']}/neighborhood?depth=1"))
    save("expand_manalyzer_cyber", client.get(
        f"/v1/documents/{checksums['manalyzer_report']}/neighborhood?depth=1&topic=cybersecurity"
    ))
    save("doc_manalyzer", client.get(f"/v1/documents/{checksums['manalyzer_report']}"))
    save("notfound", client.get("/v1/indicators/md5/" + "0" * 32))

    sha1 = None
    sha256 = None
    for node in json.loads((OUT / "expand_manalyzer.json").read_text())["nodes"]:
        if node["kind"] == "ind" and node["type"] == "sha1":
            sha1 = node["value"]
        if node["kind"] == "ind" and node["type"] == "sha256":
            sha256 = node["value"]
    save("indicator_sha1", client.get(f"/v1/indicators/sha1/{sha1}"))
    save("indicator_sha256", client.get(f"/v1/indicators/sha256/{sha256}"))

    meta = {
        "wannacry_md5": WANNACRY_MD5,
        "checksums": checksums,
        "sha1_sibling": sha1,
        "sha256_sibling": sha256,
    }
    (OUT / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    print(f"wrote fixtures to {OUT}")


if __name__ == "__main__":
    main()
