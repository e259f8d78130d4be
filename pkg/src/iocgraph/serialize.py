"""JSON payload conversion for document metadata and enrichment blocks.

One schema is shared by the transaction log, the snapshot file, the
jsonl export, and the HTTP document payloads, so a document survives
any round trip bit-identically.
"""

from __future__ import annotations

from datetime import datetime
from typing import Any

from .enrichment import (
    EnrichmentResult,
    LanguageResult,
    MapperSlot,
    TechniqueSuggestion,
    TopicLabel,
)
from .errors import LoadError
from .indicators import IndicatorType
from .ingest import AvScanMeta, CrawlerMeta, SourceKind, parse_timestamp


def dt_to_json(dt: datetime | None) -> str | None:
    return None if dt is None else dt.isoformat().replace("+00:00", "Z")


def dt_from_json(value: Any, field: str) -> datetime | None:
    return None if value is None else parse_timestamp(value, field)


def crawler_meta_to_json(meta: CrawlerMeta | None) -> dict | None:
    if meta is None:
        return None
    return {
        "url": meta.url,
        "parent_url": meta.parent_url,
        "fetched_at": dt_to_json(meta.fetched_at),
        "keywords": list(meta.keywords),
        "source_tag": meta.source_tag,
    }


def crawler_meta_from_json(obj: dict | None) -> CrawlerMeta | None:
    if obj is None:
        return None
    return CrawlerMeta(
        url=obj["url"],
        parent_url=obj.get("parent_url"),
        fetched_at=dt_from_json(obj.get("fetched_at"), "fetched_at"),
        keywords=tuple(obj.get("keywords") or ()),
        source_tag=obj.get("source_tag"),
    )


def avscan_meta_to_json(meta: AvScanMeta | None) -> dict | None:
    if meta is None:
        return None
    return {
        "scanned_file_name": meta.scanned_file_name,
        "scan_time": dt_to_json(meta.scan_time),
        "engine_verdicts": {k: v for k, v in meta.engine_verdicts},
        "file_hashes": {k: v for k, v in meta.file_hashes},
        "contained_resource_hashes": [[k, v] for k, v in meta.contained_resource_hashes],
    }


def avscan_meta_from_json(obj: dict | None) -> AvScanMeta | None:
    if obj is None:
        return None
    return AvScanMeta(
        scanned_file_name=obj.get("scanned_file_name"),
        scan_time=dt_from_json(obj.get("scan_time"), "scan_time"),
        engine_verdicts=tuple(sorted((obj.get("engine_verdicts") or {}).items())),
        file_hashes=tuple(sorted((obj.get("file_hashes") or {}).items())),
        contained_resource_hashes=tuple((k, v) for k, v in (obj.get("contained_resource_hashes") or [])),
    )


def enrichment_to_json(res: EnrichmentResult | None) -> dict | None:
    if res is None:
        return None
    return {
        "language": {
            "language": res.language.language,
            "confidence": res.language.confidence,
            "sufficient": res.language.sufficient,
        },
        "topic": res.topic.value,
        "techniques": [
            {"technique_id": t.technique_id, "confidence": t.confidence, "mapper": t.mapper.value}
            for t in res.techniques
        ],
    }


def enrichment_from_json(obj: dict | None) -> EnrichmentResult | None:
    if obj is None:
        return None
    lang = obj["language"]
    return EnrichmentResult(
        language=LanguageResult(
            language=lang.get("language"),
            confidence=lang.get("confidence", 0.0),
            sufficient=lang.get("sufficient", False),
        ),
        topic=TopicLabel(obj["topic"]),
        techniques=tuple(
            TechniqueSuggestion(
                technique_id=t["technique_id"],
                confidence=t["confidence"],
                mapper=MapperSlot(t["mapper"]),
            )
            for t in obj.get("techniques") or ()
        ),
    )


def source_kind_from_json(value: Any, line: int | None = None) -> SourceKind:
    try:
        return SourceKind(value)
    except ValueError:
        raise LoadError(f"unknown source_kind {value!r}", line=line) from None


def indicator_type_from_json(value: Any, line: int | None = None) -> IndicatorType:
    try:
        return IndicatorType(value)
    except ValueError:
        raise LoadError(f"unknown indicator type {value!r}", line=line) from None
