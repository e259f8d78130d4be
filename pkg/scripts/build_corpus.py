"""Regenerate the bundled fixture corpus and its plants manifest.

Run from the repo root: python scripts/build_corpus.py
Validates that extraction recovers exactly the planted indicator sets.
"""

import hashlib
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"

MD5_WANNACRY = "84c82835a5d21bbcf75a61706d8ab549"
SHA1_SIBLING = hashlib.sha1(b"wannacry sample payload").hexdigest()
SHA256_SIBLING = hashlib.sha256(b"wannacry sample payload").hexdigest()
SHA256_QAKBOT = hashlib.sha256(b"qakbot sample").hexdigest()
SHA256_SHARED_RESOURCE = "84f7c54dc015637a28f06867607c2e0bdd225d10debb1390ff212d91cd2d042b"
SHA256_MANIFEST = hashlib.sha256(b"pe manifest resource").hexdigest()
SHA256_SCAN1 = "5577ce9aa4e4ec2735247c5769f0e84db599825f2d95159b0102f3b30e80b6bb"
SHA256_SCAN2 = "06f11f4a555a4891c93f13f82dc06e8bcedda2a71c8a5e6aa5c18da871f41238"
SHA256_SCAN3 = "f8d11b1e3e027355a11163049b530de4fd67183abd08a691d5d18744653ef575"
SHA256_SCAN4 = "f3efcfc7121f2348deb6f3b5ffde60878d978c25281e67defdc288feaef8b38c"

QAKBOT_IP = "89.101.97.139"
IP_A = "203.0.113.44"
IP_B = "198.51.100.23"


def text_fixtures():
    blog = (
        "Our network monitoring product flags malicious traffic by checking payload "
        "checksums against known malware signatures. As a demonstration we loaded the "
        f"WannaCry sample whose md5 digest is {MD5_WANNACRY} into the sandbox, and the "
        "antivirus integration quarantined the infected host within seconds. The same "
        "detection pipeline also inspects encrypted sessions for beacon patterns, so "
        "analysts reviewing an intrusion get the full compromise timeline without "
        "manual triage of every alert."
    )
    blog_plants = [
        ["md5", MD5_WANNACRY],
        ["malware", "wannacry"],
    ]

    manalyzer = (
        "Static analysis summary for the submitted malware binary. Checksums computed "
        f"over the file: md5 {MD5_WANNACRY}, sha1 {SHA1_SIBLING}, sha256 {SHA256_SIBLING}. "
        "Antivirus engines flag the sample as ransomware; the import table references "
        "cmd.exe for process launch, a loader technique common to WannaCry droppers "
        "attributed to Lazarus operators. Sections show entropy consistent with a packed "
        "malicious payload, and the sandbox observed a second encrypted executable "
        "unpacking at runtime to resolve the backdoor infrastructure."
    )
    manalyzer_plants = [
        ["md5", MD5_WANNACRY],
        ["sha1", SHA1_SIBLING],
        ["sha256", SHA256_SIBLING],
        ["filename", "cmd.exe"],
        ["malware", "wannacry"],
        ["apt", "lazarus"],
    ]

    imageboard = (
        "ok so someone in the other thread pasted these three strings and said they all "
        f"point at the same file: {MD5_WANNACRY} then {SHA1_SIBLING} and finally "
        f"{SHA256_SIBLING} which is the long one. no idea what any of it means, i just "
        "collect weird strings people drop in threads. anyway the weather here has been "
        "awful all week and my coffee machine finally gave up this morning, so that is "
        "the real tragedy if you ask me lol."
    )
    imageboard_plants = [
        ["md5", MD5_WANNACRY],
        ["sha1", SHA1_SIBLING],
        ["sha256", SHA256_SIBLING],
    ]

    log4j = (
        "Advisory: active exploitation of CVE-2021-44228 continues against unpatched "
        "servers, with the incomplete fix tracked separately as CVE-2021-45046. "
        "Adversaries exploit the public-facing application (T1190) to gain execution, "
        "then stage second-phase payloads. Apply the vendor patch, audit for intrusion "
        "artifacts, and rotate any credentials a compromised host could reach. "
        "Exploitation attempts remain trivial to launch, so unpatched infrastructure "
        "should be treated as breached until proven otherwise."
    )
    log4j_plants = [
        ["cve", "CVE-2021-44228"],
        ["cve", "CVE-2021-45046"],
        ["technique", "T1190"],
    ]

    noticia = (
        "Las autoridades confirmaron que los sistemas de la empresa fueron comprometidos "
        "durante la madrugada y que los datos robados ya circulan por varios foros. El "
        "boletin oficial con las recomendaciones para los administradores fue publicado "
        "en el sitio corporativo aviso-seguridad.example segun el comunicado que "
        "distribuyeron esta manana por correo a todos los empleados de las oficinas."
    )
    noticia_plants = [["domain", "aviso-seguridad.example"]]

    return {
        "raw/wannacry_blog.txt": (blog, blog_plants),
        "raw/manalyzer_report.txt": (manalyzer, manalyzer_plants),
        "raw/imageboard_thread.txt": (imageboard, imageboard_plants),
        "raw/log4j_advisory.txt": (log4j, log4j_plants),
        "raw/noticia_es.txt": (noticia, noticia_plants),
    }


def crawler_fixtures():
    qakbot_records = [
        (
            {
                "url": "https://github.example/intel/qakbot-iocs",
                "parent_url": "https://github.example/intel",
                "fetched_at": "2022-03-15T10:00:00Z",
                "keywords": ["qakbot", "c2"],
                "source_tag": "github",
                "body": (
                    "Qakbot command and control infrastructure observed this week: "
                    f"{QAKBOT_IP} and {IP_A} both served the loader configuration."
                ),
            },
            [["ip", QAKBOT_IP], ["ip", IP_A], ["malware", "qakbot"]],
        ),
        (
            {
                "url": "https://github.example/research/banker-tracker",
                "fetched_at": "2022-03-16T08:30:00Z",
                "keywords": ["qakbot", "banker"],
                "source_tag": "github",
                "body": (
                    "Tracker update: Qakbot campaign rotated to three addresses, "
                    f"{QAKBOT_IP}, {IP_B} and {IP_A}. Expect further rotation."
                ),
            },
            [["ip", QAKBOT_IP], ["ip", IP_A], ["ip", IP_B], ["malware", "qakbot"]],
        ),
        (
            {
                "url": "https://paste.example/raw/zx81",
                "fetched_at": "2022-03-18T21:12:00Z",
                "keywords": ["qakbot"],
                "source_tag": "pastebin",
                "body": (
                    f"qakbot drop list: {QAKBOT_IP} {IP_B} sample sha256 {SHA256_QAKBOT}"
                ),
            },
            [["ip", QAKBOT_IP], ["ip", IP_B], ["malware", "qakbot"], ["sha256", SHA256_QAKBOT]],
        ),
    ]

    reports_records = [
        (
            {
                "url": "https://reports.example/state-of-attacks-2021",
                "fetched_at": "2021-11-02T09:00:00Z",
                "keywords": ["annual report", "exploits"],
                "source_tag": "threat_report",
                "body": (
                    "Our annual review of exploitation in the wild found that attackers "
                    "still favor a handful of older vulnerabilities. CVE-2014-4404 remains "
                    "a reliable remote code execution exploit against legacy Apple systems, "
                    "while CVE-2021-34527 dominated the Windows print spooler incidents we "
                    "handled. Privilege escalation through kernel exploitation (T1068) "
                    "followed initial access in most intrusions, and the @vulnwatcher "
                    "account provided early warning for several campaigns this year."
                ),
            },
            [
                ["cve", "CVE-2014-4404"],
                ["cve", "CVE-2021-34527"],
                ["technique", "T1068"],
                ["twitter", "vulnwatcher"],
            ],
        ),
        (
            {
                "url": "https://reports.example/apt-retrospective-2021",
                "fetched_at": "2021-12-14T16:45:00Z",
                "keywords": ["apt", "retrospective"],
                "source_tag": "threat_report",
                "body": (
                    "Retrospective: state-aligned intrusion sets continued to exploit "
                    "CVE-2014-4404 against unpatched macOS fleets years after disclosure, "
                    "and the OpenSSL disclosure tracked as CVE-2014-0160 still surfaces in "
                    "scans of embedded devices. Lazarus tooling reused infrastructure we "
                    "first catalogued in 2019, and post-compromise activity consistently "
                    "included credential dumping from LSASS memory before lateral movement "
                    "toward payment systems."
                ),
            },
            [
                ["cve", "CVE-2014-4404"],
                ["cve", "CVE-2014-0160"],
                ["apt", "lazarus"],
            ],
        ),
    ]
    return {
        "crawler/qakbot.jsonl": qakbot_records,
        "crawler/reports_2021.jsonl": reports_records,
    }


def avscan_fixtures():
    scans = [
        (
            {
                "file_name": "rkinstaller.exe",
                "scan_time": "2022-05-02T11:00:00Z",
                "hashes": {"sha256": SHA256_SCAN1},
                "resources": [
                    {"kind": "sha256", "hex": SHA256_SHARED_RESOURCE},
                    {"kind": "sha256", "hex": SHA256_MANIFEST},
                ],
                "verdicts": {"enginea": "trojan.generic", "engineb": "malicious"},
            },
            [
                ["sha256", SHA256_SCAN1],
                ["sha256", SHA256_SHARED_RESOURCE],
                ["sha256", SHA256_MANIFEST],
                ["filename", "rkinstaller.exe"],
            ],
        ),
        (
            {
                "scan_time": "2022-05-03T09:30:00Z",
                "hashes": {"sha256": SHA256_SCAN2},
                "resources": [
                    {"kind": "sha256", "hex": SHA256_SHARED_RESOURCE},
                    {"kind": "sha256", "hex": SHA256_MANIFEST},
                ],
                "verdicts": {"enginea": "trojan.generic"},
            },
            [
                ["sha256", SHA256_SCAN2],
                ["sha256", SHA256_SHARED_RESOURCE],
                ["sha256", SHA256_MANIFEST],
            ],
        ),
        (
            {
                "file_name": "rkinstaller364.exe",
                "scan_time": "2022-05-04T14:10:00Z",
                "hashes": {"sha256": SHA256_SCAN3},
                "resources": [
                    {"kind": "sha256", "hex": SHA256_SHARED_RESOURCE},
                    {"kind": "sha256", "hex": SHA256_MANIFEST},
                ],
                "verdicts": {"engineb": "malicious", "enginec": "ransom.win32"},
            },
            [
                ["sha256", SHA256_SCAN3],
                ["sha256", SHA256_SHARED_RESOURCE],
                ["sha256", SHA256_MANIFEST],
                ["filename", "rkinstaller364.exe"],
            ],
        ),
        (
            {
                "file_name": "poinstaller257.exe",
                "scan_time": "2022-05-06T17:55:00Z",
                "hashes": {"sha256": SHA256_SCAN4},
                "resources": [{"kind": "sha256", "hex": SHA256_SHARED_RESOURCE}],
                "verdicts": {"enginea": "trojan.generic"},
            },
            [
                ["sha256", SHA256_SCAN4],
                ["sha256", SHA256_SHARED_RESOURCE],
                ["filename", "poinstaller257.exe"],
            ],
        ),
    ]
    return {"avscan/pe_scans.jsonl": scans}


CVSS_ROWS = [
    "cve_id,cvss_v2,cvss_v3,published_year",
    "CVE-2021-44228,9.2,10.0,2021",
    "CVE-2021-45046,5.1,9.0,2021",
    "CVE-2021-34527,9.0,8.8,2021",
    "CVE-2017-11882,9.3,7.8,2017",
    "CVE-2012-0158,9.3,,2012",
    "CVE-2014-0160,5.0,7.5,2014",
    "CVE-2021-34481,4.6,7.8,2021",
    "CVE-2021-45105,4.3,5.9,2021",
    "CVE-2021-1675,9.3,8.8,2021",
    "CVE-2021-40444,6.8,7.8,2021",
    "CVE-2017-0199,9.3,7.8,2017",
    "CVE-2014-4404,9.3,,2014",
]


TOPIC_EXPECTATIONS = {
    "raw/wannacry_blog.txt": "cybersecurity",
    "raw/manalyzer_report.txt": "cybersecurity",
    "raw/imageboard_thread.txt": "not_cybersecurity",
    "raw/log4j_advisory.txt": "cybersecurity",
    "raw/noticia_es.txt": "insufficient_data",  # Spanish is never classified
}


def main():
    sys.path.insert(0, str(ROOT / "src"))
    from iocgraph import extraction
    from iocgraph.enrichment import default_enricher
    from iocgraph.ingest import parse_av_scan

    cfg = extraction.default_config()
    enricher = default_enricher()
    manifest = {"text_files": {}, "crawler_files": {}, "avscan_files": {}}
    failures = []

    def check(label, text, plants):
        got = {(m.type.value, m.value) for m in extraction.extract_all(text, cfg)}
        want = {(t, v) for t, v in plants}
        if got != want:
            failures.append(f"{label}:\n  extra:   {sorted(got - want)}\n  missing: {sorted(want - got)}")
        expected_topic = TOPIC_EXPECTATIONS.get(label)
        if expected_topic is not None:
            topic = enricher.enrich(text).topic.value
            if topic != expected_topic:
                failures.append(f"{label}: topic {topic} != expected {expected_topic}")

    for rel, (text, plants) in text_fixtures().items():
        path = CORPUS / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n", encoding="utf-8")
        manifest["text_files"][rel] = plants
        check(rel, text, plants)

    for rel, records in crawler_fixtures().items():
        path = CORPUS / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fp:
            for record, _ in records:
                fp.write(json.dumps(record, ensure_ascii=False) + "\n")
        manifest["crawler_files"][rel] = [plants for _, plants in records]
        for i, (record, plants) in enumerate(records):
            check(f"{rel}:{i + 1}", record["body"], plants)

    for rel, scans in avscan_fixtures().items():
        path = CORPUS / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fp:
            for record, _ in scans:
                fp.write(json.dumps(record, ensure_ascii=False) + "\n")
        manifest["avscan_files"][rel] = [plants for _, plants in scans]
        for i, (record, plants) in enumerate(scans):
            draft = parse_av_scan(record)
            got = {(t.value, v) for t, v in draft.structured_indicators}
            want = {(t, v) for t, v in plants}
            if got != want:
                failures.append(f"{rel}:{i + 1}: structured mismatch\n  extra: {sorted(got - want)}\n  missing: {sorted(want - got)}")

    (CORPUS / "extra").mkdir(parents=True, exist_ok=True)
    (CORPUS / "extra" / "hello.txt").write_text("hello world\n", encoding="utf-8")
    (CORPUS / "cvss.csv").write_text("\n".join(CVSS_ROWS) + "\n", encoding="utf-8")
    (CORPUS / "plants.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")

    if failures:
        print("PLANT VALIDATION FAILED")
        print("\n".join(failures))
        sys.exit(1)
    print("corpus written and validated:")
    print(f"  sha1 sibling    {SHA1_SIBLING}")
    print(f"  sha256 sibling  {SHA256_SIBLING}")
    print(f"  qakbot sha256   {SHA256_QAKBOT}")
    print(f"  manifest sha256 {SHA256_MANIFEST}")


if __name__ == "__main__":
    main()
