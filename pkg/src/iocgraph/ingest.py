"""Parsers for the three document source categories.

Every parser yields a DocumentDraft with a SHA256 checksum used for
exact deduplication. Raw text is checksummed over the input bytes as
received; structured records (crawler, AV scan) are checksummed over a
canonical JSON serialization so the same record is a duplicate no
matter how a transport formatted it.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Mapping

from .errors import EmptyDocument, MalformedRecord
from .indicators import HASH_TYPES, IndicatorType
from enum import Enum


class SourceKind(str, Enum):
    RAW_TEXT = "text"
    CRAWLER = "crawler"
    AV_SCAN = "avscan"


HASH_KIND_TYPES = {
    "md5": IndicatorType.MD5,
    "sha1": IndicatorType.SHA1,
    "sha256": IndicatorType.SHA256,
    "sha512": IndicatorType.SHA512,
}

_CHECKSUM_RE = re.compile(r"^[0-9a-f]{64}$")
_HEX_RE = re.compile(r"^[0-9a-fA-F]+$")


@dataclass(frozen=True)
class CrawlerMeta:
    url: str
    parent_url: str | None = None
    fetched_at: datetime | None = None
    keywords: tuple[str, ...] = ()
    source_tag: str | None = None


@dataclass(frozen=True)
class AvScanMeta:
    scanned_file_name: str | None = None
    scan_time: datetime | None = None
    engine_verdicts: tuple[tuple[str, str], ...] = ()
    file_hashes: tuple[tuple[str, str], ...] = ()
    contained_resource_hashes: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class DocumentDraft:
    raw_text: str
    source_kind: SourceKind
    checksum: str
    ingested_at: datetime
    crawler_meta: CrawlerMeta | None = None
    avscan_meta: AvScanMeta | None = None
    structured_indicators: tuple[tuple[IndicatorType, str], ...] = ()

    @property
    def skip_text_analysis(self) -> bool:
        """AV scans bypass free-text extraction and all enrichment."""
        return self.source_kind is SourceKind.AV_SCAN


def _now() -> datetime:
    return datetime.now(timezone.utc)


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def record_bytes(record: Mapping[str, Any]) -> bytes:
    """Canonical serialization of a structured record for checksumming."""
    return json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def parse_timestamp(value: Any, field_name: str) -> datetime:
    """RFC 3339 timestamp; a trailing Z is accepted on every Python we run on."""
    if isinstance(value, datetime):
        dt = value
    elif isinstance(value, str):
        try:
            dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
        except ValueError:
            raise MalformedRecord(f"unparseable timestamp in {field_name!r}: {value!r}", field=field_name) from None
    else:
        raise MalformedRecord(f"{field_name!r} must be a timestamp string", field=field_name)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def _coerce_record(record: bytes | str | Mapping[str, Any], kind: str) -> dict[str, Any]:
    if isinstance(record, (bytes, str)):
        text = record.decode("utf-8", errors="replace") if isinstance(record, bytes) else record
        if not text.strip():
            raise EmptyDocument(f"empty {kind} record")
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"{kind} record is not valid JSON: {exc}") from None
    else:
        obj = dict(record)
    if not isinstance(obj, dict):
        raise MalformedRecord(f"{kind} record must be a JSON object")
    return obj


def parse_raw_text(data: bytes) -> DocumentDraft:
    """Wrap an arbitrary byte blob as one unstructured text document."""
    if not data:
        raise EmptyDocument("raw text input is empty")
    return DocumentDraft(
        raw_text=data.decode("utf-8", errors="replace"),
        source_kind=SourceKind.RAW_TEXT,
        checksum=sha256_hex(data),
        ingested_at=_now(),
    )


def parse_crawler_record(
    record: bytes | str | Mapping[str, Any],
    source_vocab: frozenset[str] | None = None,
) -> DocumentDraft:
    """Parse one crawler record; metadata stays out of the analyzable body.

    ``source_vocab``, when given, is the closed set of accepted
    source_tag values; a tag outside it is a malformed record.
    """
    obj = _coerce_record(record, "crawler")
    body = obj.get("body")
    url = obj.get("url")
    if not isinstance(body, str) or not body:
        raise MalformedRecord("crawler record is missing 'body'", field="body")
    if not isinstance(url, str) or not url:
        raise MalformedRecord("crawler record is missing 'url'", field="url")

    fetched_at = None
    if obj.get("fetched_at") is not None:
        fetched_at = parse_timestamp(obj["fetched_at"], "fetched_at")
    keywords = obj.get("keywords") or []
    if not isinstance(keywords, list) or not all(isinstance(k, str) for k in keywords):
        raise MalformedRecord("'keywords' must be an array of strings", field="keywords")
    source_tag = obj.get("source_tag")
    if source_tag is not None:
        if not isinstance(source_tag, str):
            raise MalformedRecord("'source_tag' must be a string", field="source_tag")
        source_tag = source_tag.lower()
        if source_vocab is not None and source_tag not in source_vocab:
            raise MalformedRecord(f"source_tag {source_tag!r} not in the configured vocabulary", field="source_tag")

    meta = CrawlerMeta(
        url=url,
        parent_url=obj.get("parent_url"),
        fetched_at=fetched_at,
        keywords=tuple(keywords),
        source_tag=source_tag,
    )
    return DocumentDraft(
        raw_text=body,
        source_kind=SourceKind.CRAWLER,
        checksum=sha256_hex(record_bytes(obj)),
        ingested_at=_now(),
        crawler_meta=meta,
    )


def _check_hex(kind: str, value: Any, field_name: str) -> str:
    itype = HASH_KIND_TYPES.get(kind)
    if itype is None:
        raise MalformedRecord(f"unknown hash kind {kind!r} in {field_name!r}", field=field_name)
    if not isinstance(value, str) or not _HEX_RE.match(value or "x"):
        raise MalformedRecord(f"{field_name!r} is not a hex string", field=field_name)
    expected = HASH_TYPES[itype]
    if len(value) != expected:
        raise MalformedRecord(
            f"{field_name!r}: {kind} digest must be {expected} hex chars, got {len(value)}",
            field=field_name,
        )
    return value.lower()


def parse_av_scan(record: bytes | str | Mapping[str, Any]) -> DocumentDraft:
    """Parse a structured antivirus scan.

    Hashes and file names become structured indicators; the draft is
    flagged so it never reaches enrichment or free-text extraction.
    """
    obj = _coerce_record(record, "avscan")

    indicators: list[tuple[IndicatorType, str]] = []
    file_hashes: list[tuple[str, str]] = []
    hashes = obj.get("hashes") or {}
    if not isinstance(hashes, dict):
        raise MalformedRecord("'hashes' must be an object", field="hashes")
    for kind in sorted(hashes):
        value = _check_hex(kind, hashes[kind], f"hashes.{kind}")
        file_hashes.append((kind, value))
        indicators.append((HASH_KIND_TYPES[kind], value))

    resources_field = obj.get("resources") or []
    if not isinstance(resources_field, list):
        raise MalformedRecord("'resources' must be an array", field="resources")
    resource_hashes: list[tuple[str, str]] = []
    for i, res in enumerate(resources_field):
        if not isinstance(res, dict) or "kind" not in res or "hex" not in res:
            raise MalformedRecord(f"resources[{i}] must be an object with 'kind' and 'hex'", field=f"resources[{i}]")
        value = _check_hex(res["kind"], res["hex"], f"resources[{i}].hex")
        resource_hashes.append((res["kind"], value))
        indicators.append((HASH_KIND_TYPES[res["kind"]], value))

    file_name = obj.get("file_name")
    if file_name is not None:
        if not isinstance(file_name, str) or not file_name.strip():
            raise MalformedRecord("'file_name' must be a non-empty string", field="file_name")
        indicators.append((IndicatorType.FILENAME, file_name.strip().lower()))

    verdicts = obj.get("verdicts") or {}
    if not isinstance(verdicts, dict):
        raise MalformedRecord("'verdicts' must be an object", field="verdicts")

    scan_time = None
    if obj.get("scan_time") is not None:
        scan_time = parse_timestamp(obj["scan_time"], "scan_time")

    meta = AvScanMeta(
        scanned_file_name=file_name,
        scan_time=scan_time,
        engine_verdicts=tuple(sorted((str(k), str(v)) for k, v in verdicts.items())),
        file_hashes=tuple(file_hashes),
        contained_resource_hashes=tuple(resource_hashes),
    )
    return DocumentDraft(
        raw_text=record_bytes(obj).decode("utf-8"),
        source_kind=SourceKind.AV_SCAN,
        checksum=sha256_hex(record_bytes(obj)),
        ingested_at=_now(),
        avscan_meta=meta,
        structured_indicators=tuple(indicators),
    )


def is_duplicate(checksum: str, store) -> bool:
    """True iff a document with this checksum is already committed.

    The atomic check-and-insert lives inside the store's commit; this
    pre-check lets the pipeline drop duplicates before extraction.
    """
    from .errors import ArgumentError

    if not _CHECKSUM_RE.match(checksum):
        raise ArgumentError(f"malformed checksum: {checksum!r}")
    return store.has_checksum(checksum)
