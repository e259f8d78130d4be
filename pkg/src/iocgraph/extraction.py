"""Pattern-match extraction of potential indicators from free text.

The scanners are intentionally shallow: they find everything that fits
a type's shape and rely on a few validity checks to cut the worst
noise (entropy gate on hex runs, four-octet rule for IPs, TLD check
and top-domain suppression for domains, digit-count floor for phones).
Overlapping candidates of different types are resolved by precedence:
the more specific type wins (email over domain/handle, IP over domain,
CVE over phone).
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from .errors import ArgumentError
from .indicators import IndicatorMatch, IndicatorType
from . import resources


@dataclass(frozen=True)
class ExtractionConfig:
    """Immutable extraction settings; safe to share across threads."""

    malware_names: frozenset[str] = frozenset()
    apt_names: frozenset[str] = frozenset()
    domain_suppression: frozenset[str] = frozenset()
    file_extensions: frozenset[str] = frozenset()
    tlds: frozenset[str] = frozenset()
    entropy_threshold: float = 3.0
    refang: bool = True
    min_phone_digits: int = 7
    suppress_loopback: bool = True
    suppress_private: bool = False

    def __post_init__(self):
        if not 0.0 < self.entropy_threshold <= 4.0:
            raise ArgumentError("entropy_threshold must be in (0, 4] bits/char")
        if self.min_phone_digits < 1:
            raise ArgumentError("min_phone_digits must be positive")
        # Case-insensitive matching: fold every dictionary once, here.
        for name in ("malware_names", "apt_names", "domain_suppression", "file_extensions", "tlds"):
            folded = frozenset(v.lower() for v in getattr(self, name))
            object.__setattr__(self, name, folded)


def default_config(**overrides) -> ExtractionConfig:
    """Config backed by the bundled dictionaries."""
    base = dict(
        malware_names=resources.load_wordlist(None, "malware_names.txt"),
        apt_names=resources.load_wordlist(None, "apt_names.txt"),
        domain_suppression=resources.load_suppression(None),
        file_extensions=resources.load_wordlist(None, "file_extensions.txt"),
        tlds=resources.load_wordlist(None, "tlds.txt"),
    )
    base.update(overrides)
    return ExtractionConfig(**base)


def load_extraction_config(
    malware_path: str | Path | None = None,
    apt_path: str | Path | None = None,
    extensions_path: str | Path | None = None,
    tlds_path: str | Path | None = None,
    suppression_path: str | Path | None = None,
    **overrides,
) -> ExtractionConfig:
    """Config from dictionary files, falling back to bundled data per file."""
    return ExtractionConfig(
        malware_names=resources.load_wordlist(malware_path, "malware_names.txt"),
        apt_names=resources.load_wordlist(apt_path, "apt_names.txt"),
        file_extensions=resources.load_wordlist(extensions_path, "file_extensions.txt"),
        tlds=resources.load_wordlist(tlds_path, "tlds.txt"),
        domain_suppression=resources.load_suppression(suppression_path),
        **overrides,
    )


# ---------------------------------------------------------------------------
# refang


@dataclass(frozen=True)
class RefangResult:
    """Refanged text plus a per-character map back to the original."""

    text: str
    offsets: tuple[int, ...] = field(repr=False)

    def to_original(self, span: tuple[int, int]) -> tuple[int, int]:
        """Translate a span over the refanged text into original offsets."""
        start, end = span
        if start >= end:
            return (start, end)
        return (self.offsets[start], self.offsets[end - 1] + 1)


def refang(text: str) -> RefangResult:
    """Undo the common defang conventions: [.] (.) -> . and hxxp -> http."""
    out: list[str] = []
    offsets: list[int] = []
    i = 0
    n = len(text)
    while i < n:
        chunk = text[i : i + 3]
        if chunk == "[.]" or chunk == "(.)":
            out.append(".")
            offsets.append(i)
            i += 3
            continue
        if text[i : i + 4].lower() == "hxxp":
            for j, c in enumerate(text[i : i + 4]):
                out.append(("t" if c.islower() else "T") if c.lower() == "x" else c)
                offsets.append(i + j)
            i += 4
            continue
        out.append(text[i])
        offsets.append(i)
        i += 1
    return RefangResult(text="".join(out), offsets=tuple(offsets))


# ---------------------------------------------------------------------------
# token entropy


def shannon_entropy(token: str) -> float:
    """Bits per character of the token's empirical character distribution."""
    if not token:
        raise ArgumentError("entropy of an empty token is undefined")
    counts = Counter(token)
    n = len(token)
    return -sum((c / n) * math.log2(c / n) for c in counts.values())


# ---------------------------------------------------------------------------
# raw scanners (one candidate per occurrence, spans into the scanned text)


@dataclass(frozen=True)
class _Raw:
    type: IndicatorType
    value: str
    span: tuple[int, int]


_HASH_LENGTH_TYPE = {32: IndicatorType.MD5, 40: IndicatorType.SHA1, 64: IndicatorType.SHA256, 128: IndicatorType.SHA512}

# Maximal hex run: alphanumeric neighbors would make it part of a longer token.
_HEX_RUN = re.compile(r"(?<![A-Za-z0-9])[0-9a-fA-F]+(?![A-Za-z0-9])")

_CVE = re.compile(r"(?<![A-Za-z0-9])CVE-\d{4}-\d{4,}(?![A-Za-z0-9])", re.IGNORECASE)

_TECHNIQUE = re.compile(r"(?<![A-Za-z0-9_])[Tt]\d{4}(?:\.\d{3})?(?![A-Za-z0-9_])(?!\.\d)")

# Four dotted decimal octets, not extendable into a longer dotted-numeric run.
_IP = re.compile(r"(?<![\d.])(\d{1,3}\.\d{1,3}\.\d{1,3}\.\d{1,3})(?!\.?\d)")

_EMAIL = re.compile(
    r"(?<![A-Za-z0-9._%+-])"
    r"([A-Za-z0-9][A-Za-z0-9._%+-]*@(?:[A-Za-z0-9](?:[A-Za-z0-9-]{0,61}[A-Za-z0-9])?\.)+[A-Za-z]{2,24})"
    r"(?!\.?[A-Za-z0-9-])"
)

_DOMAIN = re.compile(
    r"(?<![A-Za-z0-9.@_-])"
    r"((?:[A-Za-z0-9](?:[A-Za-z0-9-]{0,61}[A-Za-z0-9])?\.)+[A-Za-z]{2,24})"
    r"(?!\.?[A-Za-z0-9-])"
)

_TWITTER = re.compile(r"(?<![A-Za-z0-9_.@-])@([A-Za-z0-9_]{1,15})(?![A-Za-z0-9_@])")

# Dots are deliberately not phone separators: dotted digit groups are
# far more often IPs or version numbers than phone numbers.
_PHONE = re.compile(r"(?<![A-Za-z0-9_@.-])(\+?\(?\d[\d\s()-]{4,18}\d)(?![A-Za-z0-9])")

# Digit groupings that are almost always dates or year ranges, not phones.
_DATEISH = (
    re.compile(r"^\d{4}-\d{4}$"),
    re.compile(r"^\d{4}-\d{2}-\d{2}$"),
    re.compile(r"^\d{2}-\d{2}-\d{4}$"),
)


def _scan_hashes(text: str, cfg: ExtractionConfig) -> list[_Raw]:
    out = []
    for m in _HEX_RUN.finditer(text):
        itype = _HASH_LENGTH_TYPE.get(len(m.group(0)))
        if itype is None:
            continue
        value = m.group(0).lower()
        if shannon_entropy(value) < cfg.entropy_threshold:
            continue
        out.append(_Raw(itype, value, m.span()))
    return out


def _scan_cves(text: str) -> list[_Raw]:
    return [_Raw(IndicatorType.CVE, m.group(0).upper(), m.span()) for m in _CVE.finditer(text)]


def _scan_techniques(text: str) -> list[_Raw]:
    return [_Raw(IndicatorType.TECHNIQUE, m.group(0).upper(), m.span()) for m in _TECHNIQUE.finditer(text)]


_LOOPBACK = re.compile(r"^(127\.|0\.0\.0\.0$)")
_PRIVATE = re.compile(r"^(10\.|192\.168\.|172\.(1[6-9]|2\d|3[01])\.)")


def _scan_ips(text: str, cfg: ExtractionConfig) -> list[_Raw]:
    out = []
    for m in _IP.finditer(text):
        octets = m.group(1).split(".")
        if any(int(o) > 255 for o in octets):
            continue
        value = ".".join(str(int(o)) for o in octets)
        if cfg.suppress_loopback and _LOOPBACK.match(value):
            continue
        if cfg.suppress_private and _PRIVATE.match(value):
            continue
        out.append(_Raw(IndicatorType.IP, value, m.span(1)))
    return out


def _domain_ok(domain: str, cfg: ExtractionConfig) -> bool:
    tld = domain.rsplit(".", 1)[-1]
    return tld in cfg.tlds


def _scan_emails(text: str, cfg: ExtractionConfig) -> list[_Raw]:
    out = []
    for m in _EMAIL.finditer(text):
        value = m.group(1).lower()
        if not _domain_ok(value.rsplit("@", 1)[1], cfg):
            continue
        out.append(_Raw(IndicatorType.EMAIL, value, m.span(1)))
    return out


def _scan_domains(text: str, cfg: ExtractionConfig) -> list[_Raw]:
    out = []
    for m in _DOMAIN.finditer(text):
        start = m.start(1)
        if start > 0 and text[start - 1] == "@":
            continue
        value = m.group(1).lower()
        if not _domain_ok(value, cfg):
            continue
        if value in cfg.domain_suppression:
            continue
        out.append(_Raw(IndicatorType.DOMAIN, value, m.span(1)))
    return out


def _scan_twitter(text: str) -> list[_Raw]:
    return [_Raw(IndicatorType.TWITTER, m.group(1), m.span()) for m in _TWITTER.finditer(text)]


def _scan_phones(text: str, cfg: ExtractionConfig) -> list[_Raw]:
    out = []
    for m in _PHONE.finditer(text):
        candidate = m.group(1)
        digits = re.sub(r"\D", "", candidate)
        if not cfg.min_phone_digits <= len(digits) <= 15:
            continue
        if any(p.match(candidate) for p in _DATEISH):
            continue
        # Space-separated digit groups ("2017 2018 2019") are phone-shaped
        # only when anchored by a country prefix or parenthesized area code.
        if " " in candidate and not candidate.startswith(("+", "(")):
            continue
        value = ("+" + digits) if candidate.startswith("+") else digits
        out.append(_Raw(IndicatorType.PHONE, value, m.span(1)))
    return out


@lru_cache(maxsize=8)
def _filename_pattern(extensions: frozenset[str]) -> re.Pattern | None:
    if not extensions:
        return None
    alt = "|".join(re.escape(e) for e in sorted(extensions, key=len, reverse=True))
    return re.compile(
        rf"(?<![A-Za-z0-9_.~-])([A-Za-z0-9_~][A-Za-z0-9_.~-]*\.(?:{alt}))(?![A-Za-z0-9_-])(?!\.[A-Za-z0-9])",
        re.IGNORECASE,
    )


def _scan_filenames(text: str, cfg: ExtractionConfig) -> list[_Raw]:
    pattern = _filename_pattern(cfg.file_extensions)
    if pattern is None:
        return []
    return [_Raw(IndicatorType.FILENAME, m.group(1).lower(), m.span(1)) for m in pattern.finditer(text)]


_WS_DASH = re.compile(r"[\s-]+")


@lru_cache(maxsize=16)
def _dictionary_pattern(entries: frozenset[str]) -> re.Pattern | None:
    if not entries:
        return None
    # Longest phrases first so "lazarus group" wins over "lazarus";
    # word gaps tolerate hyphenated or multi-space mentions.
    parts = []
    for entry in sorted(entries, key=lambda e: (-len(e), e)):
        words = [re.escape(w) for w in _WS_DASH.split(entry) if w]
        parts.append(r"[\s-]+".join(words))
    return re.compile(rf"(?<![A-Za-z0-9])(?:{'|'.join(parts)})(?![A-Za-z0-9])", re.IGNORECASE)


def _scan_dictionary(text: str, entries: frozenset[str], itype: IndicatorType) -> list[_Raw]:
    pattern = _dictionary_pattern(entries)
    if pattern is None:
        return []
    out = []
    for m in pattern.finditer(text):
        value = _WS_DASH.sub(" ", m.group(0).lower())
        out.append(_Raw(itype, value, m.span()))
    return out


# ---------------------------------------------------------------------------
# overlap resolution and aggregation

# (winner, loser): the more specific type claims the overlapping span.
_PRECEDENCE = (
    (IndicatorType.EMAIL, IndicatorType.DOMAIN),
    (IndicatorType.EMAIL, IndicatorType.TWITTER),
    (IndicatorType.IP, IndicatorType.DOMAIN),
    (IndicatorType.CVE, IndicatorType.PHONE),
)


def _resolve_overlaps(raws: list[_Raw]) -> list[_Raw]:
    by_type: dict[IndicatorType, list[_Raw]] = {}
    for r in raws:
        by_type.setdefault(r.type, []).append(r)
    dropped: set[int] = set()
    for winner, loser in _PRECEDENCE:
        winners = by_type.get(winner, ())
        losers = by_type.get(loser, ())
        if not winners or not losers:
            continue
        for cand in losers:
            for w in winners:
                if cand.span[0] < w.span[1] and w.span[0] < cand.span[1]:
                    dropped.add(id(cand))
                    break
    return [r for r in raws if id(r) not in dropped]


def _aggregate(raws: list[_Raw]) -> list[IndicatorMatch]:
    grouped: dict[tuple[IndicatorType, str], list[tuple[int, int]]] = {}
    for r in raws:
        grouped.setdefault((r.type, r.value), []).append(r.span)
    matches = [
        IndicatorMatch(type=t, value=v, span=min(spans), occurrences=len(spans))
        for (t, v), spans in grouped.items()
    ]
    matches.sort(key=lambda m: (m.type.value, m.value))
    return matches


# ---------------------------------------------------------------------------
# public extractors


def extract_hashes(text: str, cfg: ExtractionConfig) -> list[IndicatorMatch]:
    """md5/sha1/sha256/sha512 digests: exact-length high-entropy hex runs."""
    return _aggregate(_scan_hashes(text, cfg))


def extract_network(text: str, cfg: ExtractionConfig) -> list[IndicatorMatch]:
    """IPs, emails, domains, twitter handles, phone numbers."""
    raws = (
        _scan_ips(text, cfg)
        + _scan_emails(text, cfg)
        + _scan_domains(text, cfg)
        + _scan_twitter(text)
        + _scan_phones(text, cfg)
    )
    return _aggregate(_resolve_overlaps(raws))


def extract_ids(text: str) -> list[IndicatorMatch]:
    """CVE identifiers and ATT&CK technique ids."""
    return _aggregate(_scan_cves(text) + _scan_techniques(text))


def extract_names(text: str, cfg: ExtractionConfig) -> list[IndicatorMatch]:
    """File names by extension, malware and APT names by dictionary."""
    raws = (
        _scan_filenames(text, cfg)
        + _scan_dictionary(text, cfg.malware_names, IndicatorType.MALWARE)
        + _scan_dictionary(text, cfg.apt_names, IndicatorType.APT)
    )
    return _aggregate(raws)


def extract_all(text: str, cfg: ExtractionConfig) -> list[IndicatorMatch]:
    """Run every scanner over (optionally refanged) text.

    Returns one aggregated match per (type, value), ordered by
    (type, value); spans index the refanged text when refang is on.
    """
    if cfg.refang:
        text = refang(text).text
    raws = (
        _scan_hashes(text, cfg)
        + _scan_cves(text)
        + _scan_techniques(text)
        + _scan_ips(text, cfg)
        + _scan_emails(text, cfg)
        + _scan_domains(text, cfg)
        + _scan_twitter(text)
        + _scan_phones(text, cfg)
        + _scan_filenames(text, cfg)
        + _scan_dictionary(text, cfg.malware_names, IndicatorType.MALWARE)
        + _scan_dictionary(text, cfg.apt_names, IndicatorType.APT)
    )
    return _aggregate(_resolve_overlaps(raws))
