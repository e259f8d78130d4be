"""Indicator taxonomy: the 14 node types, canonical forms, and display colors."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import ArgumentError


class IndicatorType(str, Enum):
    """The closed set of non-document node types.

    The enum value doubles as the wire/URL name; graph exports derive
    node labels (``node_md5``) and edge labels (``MD5``) from it.
    """

    MD5 = "md5"
    SHA1 = "sha1"
    SHA256 = "sha256"
    SHA512 = "sha512"
    FILENAME = "filename"
    MALWARE = "malware"
    APT = "apt"
    EMAIL = "email"
    CVE = "cve"
    TWITTER = "twitter"
    PHONE = "phone"
    IP = "ip"
    DOMAIN = "domain"
    TECHNIQUE = "technique"

    @property
    def node_label(self) -> str:
        return f"node_{self.value}"

    @property
    def edge_label(self) -> str:
        return self.value.upper()

    @classmethod
    def from_name(cls, name: str) -> "IndicatorType":
        try:
            return cls(name.lower())
        except ValueError:
            raise ArgumentError(f"unknown indicator type: {name!r}") from None


HASH_TYPES = {
    IndicatorType.MD5: 32,
    IndicatorType.SHA1: 40,
    IndicatorType.SHA256: 64,
    IndicatorType.SHA512: 128,
}

# Fixed per-type palette; documents are cyan and edges inherit the
# indicator color. The CLI dot output and the explorer UI share it.
DOCUMENT_COLOR = "#00bcd4"
TYPE_COLORS = {
    IndicatorType.MD5: "#9c27b0",
    IndicatorType.SHA1: "#e91e63",
    IndicatorType.SHA256: "#9acd32",
    IndicatorType.SHA512: "#9e9e9e",
    IndicatorType.FILENAME: "#008080",
    IndicatorType.MALWARE: "#8b4513",
    IndicatorType.APT: "#b57edc",
    IndicatorType.EMAIL: "#ffd700",
    IndicatorType.CVE: "#ff0000",
    IndicatorType.TWITTER: "#800000",
    IndicatorType.PHONE: "#1e90ff",
    IndicatorType.IP: "#ff8c00",
    IndicatorType.DOMAIN: "#228b22",
    IndicatorType.TECHNIQUE: "#d7c797",
}


@dataclass(frozen=True)
class IndicatorMatch:
    """One aggregated (type, value) hit within a single document.

    ``span`` is the first occurrence, as (start, end) offsets into the
    text the extractor ran on; ``occurrences`` counts all hits of the
    same canonical value in that document.
    """

    type: IndicatorType
    value: str
    span: tuple[int, int]
    occurrences: int = 1


_HEX_RE = re.compile(r"^[0-9a-f]+$")
_CVE_RE = re.compile(r"^CVE-\d{4}-\d{4,}$")
_TECHNIQUE_RE = re.compile(r"^T\d{4}(?:\.\d{3})?$")
_TWITTER_RE = re.compile(r"^[A-Za-z0-9_]{1,15}$")
_DOMAIN_RE = re.compile(r"^(?:[a-z0-9](?:[a-z0-9-]*[a-z0-9])?\.)+[a-z]{2,}$")


def canonical_value(itype: IndicatorType, value: str) -> str:
    """Normalize ``value`` into the canonical stored form for ``itype``.

    Raises ArgumentError when the value cannot possibly be of that type.
    """
    value = value.strip()
    if not value:
        raise ArgumentError(f"empty value for {itype.value}")

    if itype in HASH_TYPES:
        v = value.lower()
        if len(v) != HASH_TYPES[itype] or not _HEX_RE.match(v):
            raise ArgumentError(f"not a valid {itype.value} digest: {value!r}")
        return v
    if itype is IndicatorType.CVE:
        v = value.upper()
        if not _CVE_RE.match(v):
            raise ArgumentError(f"not a valid CVE id: {value!r}")
        return v
    if itype is IndicatorType.TECHNIQUE:
        v = value.upper()
        if not _TECHNIQUE_RE.match(v):
            raise ArgumentError(f"not a valid ATT&CK technique id: {value!r}")
        return v
    if itype is IndicatorType.TWITTER:
        v = value.lstrip("@")
        if not _TWITTER_RE.match(v):
            raise ArgumentError(f"not a valid twitter username: {value!r}")
        return v
    if itype is IndicatorType.EMAIL:
        v = value.lower()
        if "@" not in v[1:-1]:
            raise ArgumentError(f"not a valid email address: {value!r}")
        return v
    if itype is IndicatorType.DOMAIN:
        v = value.lower().rstrip(".")
        if not _DOMAIN_RE.match(v):
            raise ArgumentError(f"not a valid domain: {value!r}")
        return v
    if itype is IndicatorType.IP:
        parts = value.split(".")
        if len(parts) != 4:
            raise ArgumentError(f"not a valid IPv4 address: {value!r}")
        octets = []
        for p in parts:
            if not p.isdigit() or not 0 <= int(p) <= 255:
                raise ArgumentError(f"not a valid IPv4 address: {value!r}")
            octets.append(str(int(p)))
        return ".".join(octets)
    if itype is IndicatorType.PHONE:
        digits = re.sub(r"\D", "", value)
        if not digits:
            raise ArgumentError(f"not a valid phone number: {value!r}")
        if value.lstrip().startswith("+"):
            return "+" + digits
        return digits
    # FILENAME / MALWARE / APT: dictionary- and token-derived, case-folded.
    return value.lower()


def cve_year(cve_id: str) -> int:
    """Assignment year encoded in a canonical CVE identifier."""
    m = _CVE_RE.match(cve_id)
    if not m:
        raise ArgumentError(f"not a valid CVE id: {cve_id!r}")
    return int(cve_id.split("-")[1])
