import math
import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iocgraph.errors import ArgumentError
from iocgraph.extraction import (
    ExtractionConfig,
    default_config,
    extract_all,
    extract_hashes,
    extract_ids,
    extract_names,
    extract_network,
    refang,
    shannon_entropy,
)
from iocgraph.indicators import IndicatorType

CFG = default_config()

WANNACRY_MD5 = "84c82835a5d21bbcf75a61706d8ab549"


def entropy_oracle(token: str) -> float:
    """Independent frequency-count entropy."""
    counts = Counter(token)
    return -sum((c / len(token)) * math.log2(c / len(token)) for c in counts.values())


def values(matches, itype=None):
    return [m.value for m in matches if itype is None or m.type is itype]


class TestRefang:
    def test_bracket_dot(self):
        assert refang("evil[.]com").text == "evil.com"

    def test_hxxp_and_dot(self):
        assert refang("hxxp://a[.]b").text == "http://a.b"

    def test_paren_dot(self):
        assert refang("evil(.)com").text == "evil.com"

    def test_identity_without_markers(self):
        text = "nothing to do here: 1.2.3.4 http://x.com"
        assert refang(text).text == text

    def test_case_preserved(self):
        assert refang("HXXPS://EVIL[.]COM").text == "HTTPS://EVIL.COM"

    def test_offset_map_points_into_original(self):
        original = "see hxxp://evil[.]com now"
        result = refang(original)
        m = re.search(r"evil\.com", result.text)
        start, end = result.to_original(m.span())
        assert original[start:end] == "evil[.]com"


class TestShannonEntropy:
    def test_single_symbol(self):
        assert shannon_entropy("aaaa") == 0.0

    def test_two_uniform_symbols(self):
        assert shannon_entropy("ab") == 1.0

    def test_empty_token(self):
        with pytest.raises(ArgumentError):
            shannon_entropy("")

    def test_wannacry_md5_matches_oracle(self):
        expected = entropy_oracle(WANNACRY_MD5)
        assert shannon_entropy(WANNACRY_MD5) == pytest.approx(expected, abs=1e-12)
        assert expected > 3.0


class TestExtractHashes:
    def test_md5_found(self):
        matches = extract_hashes(f"the hash {WANNACRY_MD5} was found", CFG)
        assert values(matches, IndicatorType.MD5) == [WANNACRY_MD5]

    def test_low_entropy_rejected(self):
        assert extract_hashes("0" * 32, CFG) == []

    def test_embedded_run_rejected(self):
        run70 = "a1b2c3d4e5" * 7
        assert len(run70) == 70
        assert extract_hashes(f"blob {run70} end", CFG) == []

    def test_exact_lengths_map_to_types(self):
        import hashlib

        text = " ".join(
            hashlib.new(alg, b"sample").hexdigest() for alg in ("md5", "sha1", "sha256", "sha512")
        )
        got = {m.type for m in extract_hashes(text, CFG)}
        assert got == {IndicatorType.MD5, IndicatorType.SHA1, IndicatorType.SHA256, IndicatorType.SHA512}

    def test_mixed_case_canonicalized(self):
        matches = extract_hashes(WANNACRY_MD5.upper(), CFG)
        assert values(matches) == [WANNACRY_MD5]

    def test_entropy_gate_respects_config(self):
        tight = default_config(entropy_threshold=3.9)
        assert extract_hashes(WANNACRY_MD5, tight) == []


class TestExtractNetwork:
    def test_qakbot_ip(self):
        matches = extract_network("C2 at 89.101.97.139", CFG)
        assert values(matches, IndicatorType.IP) == ["89.101.97.139"]

    def test_version_number_not_ip(self):
        assert values(extract_network("version 3.10.1 released", CFG), IndicatorType.IP) == []

    def test_five_octets_not_ip(self):
        assert values(extract_network("run 1.2.3.4.5 now", CFG), IndicatorType.IP) == []

    def test_octet_range(self):
        assert values(extract_network("at 999.1.1.1 nope", CFG), IndicatorType.IP) == []

    def test_ip_at_sentence_end(self):
        assert values(extract_network("connect to 10.99.1.2.", CFG), IndicatorType.IP) == ["10.99.1.2"]

    def test_loopback_suppressed_by_default(self):
        assert values(extract_network("ping 127.0.0.1 and 0.0.0.0", CFG), IndicatorType.IP) == []

    def test_private_suppression_opt_in(self):
        text = "internal 192.168.1.10 host"
        assert values(extract_network(text, CFG), IndicatorType.IP) == ["192.168.1.10"]
        strict = default_config(suppress_private=True)
        assert values(extract_network(text, strict), IndicatorType.IP) == []

    def test_suppressed_domain(self):
        assert extract_network("visit google.com today", CFG) == []

    def test_unsuppressed_domain(self):
        assert values(extract_network("beacon to evil-panel.xyz now", CFG), IndicatorType.DOMAIN) == [
            "evil-panel.xyz"
        ]

    def test_unknown_tld_rejected(self):
        assert values(extract_network("weird.host.zzz9 thing", CFG), IndicatorType.DOMAIN) == []

    def test_email_wins_over_domain_and_handle(self):
        matches = extract_network("contact alice@corp.example asap", CFG)
        assert values(matches, IndicatorType.EMAIL) == ["alice@corp.example"]
        assert values(matches, IndicatorType.DOMAIN) == []
        assert values(matches, IndicatorType.TWITTER) == []

    def test_twitter_handle(self):
        matches = extract_network("follow @Threat_Hunter99 for updates", CFG)
        assert values(matches, IndicatorType.TWITTER) == ["Threat_Hunter99"]

    def test_handle_length_limit(self):
        assert values(extract_network("@" + "a" * 16, CFG), IndicatorType.TWITTER) == []

    def test_phone_formats(self):
        matches = extract_network("call +1-555-123-4567 or (555) 765-4321", CFG)
        assert sorted(values(matches, IndicatorType.PHONE)) == ["+15551234567", "5557654321"]

    def test_year_range_not_phone(self):
        assert values(extract_network("active 2017-2021 период", CFG), IndicatorType.PHONE) == []

    def test_date_not_phone(self):
        assert values(extract_network("seen 2021-06-01 first", CFG), IndicatorType.PHONE) == []

    def test_min_digits(self):
        assert values(extract_network("ext 12345 only", CFG), IndicatorType.PHONE) == []


class TestExtractIds:
    def test_cve_canonical_uppercase(self):
        assert values(extract_ids("patched cve-2021-44228 today")) == ["CVE-2021-44228"]

    def test_short_cve_rejected(self):
        assert extract_ids("CVE-14-44") == []

    def test_technique_with_subtechnique_and_occurrences(self):
        # T1059.003 is a real ATT&CK id (Windows Command Shell).
        matches = extract_ids("uses T1059.003 and T1059.003 again")
        assert len(matches) == 1
        assert matches[0].value == "T1059.003"
        assert matches[0].occurrences == 2

    def test_technique_embedded_rejected(self):
        assert extract_ids("sort1059 and aT1059") == []

    def test_technique_with_bad_subtechnique_digits(self):
        assert extract_ids("T1059.0034") == []


class TestExtractNames:
    def test_filename(self):
        matches = extract_names("dropped rkinstaller364.exe on disk", CFG)
        assert values(matches, IndicatorType.FILENAME) == ["rkinstaller364.exe"]

    def test_bare_extension_no_stem(self):
        assert extract_names("found a .exe today", CFG) == []

    def test_malware_dictionary_case_insensitive(self):
        matches = extract_names("the Qakbot botnet returned", CFG)
        assert values(matches, IndicatorType.MALWARE) == ["qakbot"]

    def test_multiword_phrase(self):
        matches = extract_names("deployed Cobalt Strike beacons", CFG)
        assert values(matches, IndicatorType.MALWARE) == ["cobalt strike"]

    def test_apt_name(self):
        matches = extract_names("attributed to the Lazarus group intrusion", CFG)
        assert values(matches, IndicatorType.APT) == ["lazarus group"]

    def test_no_substring_matches(self):
        assert extract_names("conti is planted but continental is not", CFG) == [
            extract_names("conti", CFG)[0]
        ]


class TestExtractAll:
    def test_empty_string(self):
        assert extract_all("", CFG) == []

    def test_three_sibling_hashes(self, corpus_dir):
        text = (corpus_dir / "raw" / "manalyzer_report.txt").read_text()
        matches = extract_all(text, CFG)
        hash_types = {m.type for m in matches if m.type.value.startswith(("md5", "sha"))}
        assert hash_types == {IndicatorType.MD5, IndicatorType.SHA1, IndicatorType.SHA256}

    def test_refang_applied(self):
        matches = extract_all("beacon hxxp://bad-host[.]xyz", CFG)
        assert values(matches, IndicatorType.DOMAIN) == ["bad-host.xyz"]

    def test_refang_disabled(self):
        cfg = default_config(refang=False)
        assert extract_all("beacon at bad-host[.]xyz", cfg) == []

    def test_cve_not_double_reported_as_phone(self):
        matches = extract_all("exploit CVE-2021-44228 observed", CFG)
        assert values(matches, IndicatorType.PHONE) == []
        assert values(matches, IndicatorType.CVE) == ["CVE-2021-44228"]

    def test_deterministic_ordering(self):
        text = "zeta.xyz alpha.xyz CVE-2020-9999 emotet 84c82835a5d21bbcf75a61706d8ab549"
        first = extract_all(text, CFG)
        assert first == extract_all(text, CFG)
        assert [(m.type.value, m.value) for m in first] == sorted(
            (m.type.value, m.value) for m in first
        )

    def test_deterministic_across_threads(self):
        text = ("WannaCry md5 84c82835a5d21bbcf75a61706d8ab549 hit evil[.]xyz and C2 at "
                "89.101.97.139, dropped rkinstaller364.exe, see CVE-2014-4404 and T1059.003")
        expected = extract_all(text, CFG)
        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(lambda _: extract_all(text, CFG), range(32)))
        assert all(r == expected for r in results)


# ---------------------------------------------------------------------------
# properties


def _render(m) -> str:
    # Canonical values re-enter text in their pattern form; handles are
    # written with the @ they are stored without.
    return f"@{m.value}" if m.type is IndicatorType.TWITTER else m.value


_SEED_TEXTS = st.sampled_from(
    [
        "md5 84c82835a5d21bbcf75a61706d8ab549 and sha1 49b8e26b5ad0b233b744b41643ac216616021e5b",
        "hxxp://c2[.]badcdn[.]xyz hosts qakbot and emotet payloads",
        "report CVE-2021-44228, CVE-2014-4404 and T1059.003 to soc@corp.example",
        "call +1 (555) 123-4567 about host 89.101.97.139 and file update-svc.exe",
        "follow @intel_feed; lazarus group reused cobalt strike on 203.0.113.44",
        "nothing interesting here at all",
    ]
)


@given(_SEED_TEXTS, st.text(alphabet=" abcdefghijklmnop.\n", max_size=40))
@settings(max_examples=60, deadline=None)
def test_property_span_validity(seed, filler):
    text = filler + " " + seed
    refanged = refang(text).text if CFG.refang else text
    for m in extract_all(text, CFG):
        sliced = refanged[m.span[0] : m.span[1]]
        re_extracted = extract_all(sliced, default_config(refang=False))
        assert any(r.type is m.type and r.value == m.value for r in re_extracted), (m, sliced)


@given(_SEED_TEXTS)
@settings(max_examples=30, deadline=None)
def test_property_canonical_idempotence(seed):
    for m in extract_all(seed, CFG):
        again = extract_all(_render(m), CFG)
        assert any(r.type is m.type and r.value == m.value for r in again), m


@given(_SEED_TEXTS, _SEED_TEXTS)
@settings(max_examples=30, deadline=None)
def test_property_no_precedence_overlaps(a, b):
    pairs = {
        (IndicatorType.EMAIL, IndicatorType.DOMAIN),
        (IndicatorType.EMAIL, IndicatorType.TWITTER),
        (IndicatorType.IP, IndicatorType.DOMAIN),
        (IndicatorType.CVE, IndicatorType.PHONE),
    }
    matches = extract_all(a + " " + b, CFG)
    for hi, lo in pairs:
        for m1 in matches:
            for m2 in matches:
                if m1.type is hi and m2.type is lo:
                    assert not (m1.span[0] < m2.span[1] and m2.span[0] < m1.span[1])


@given(_SEED_TEXTS)
@settings(max_examples=30, deadline=None)
def test_property_entropy_gate_and_suppression(seed):
    for m in extract_all(seed, CFG):
        if m.type in (IndicatorType.MD5, IndicatorType.SHA1, IndicatorType.SHA256, IndicatorType.SHA512):
            assert shannon_entropy(m.value) >= CFG.entropy_threshold
        if m.type is IndicatorType.DOMAIN:
            assert m.value not in CFG.domain_suppression


class TestConfig:
    def test_entropy_threshold_bounds(self):
        with pytest.raises(ArgumentError):
            ExtractionConfig(entropy_threshold=0.0)
        with pytest.raises(ArgumentError):
            ExtractionConfig(entropy_threshold=4.5)

    def test_dictionaries_case_folded(self):
        cfg = ExtractionConfig(malware_names=frozenset({"QakBot"}), tlds=frozenset({"XYZ"}))
        assert "qakbot" in cfg.malware_names
        assert "xyz" in cfg.tlds
