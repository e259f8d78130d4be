"""End-to-end ingestion engine shared by the HTTP service and the CLI.

The engine owns the store, the extraction config, and the enricher;
parsing/extraction of distinct inputs may run concurrently while the
store serializes commits.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from . import extraction
from .enrichment import Enricher, default_enricher
from .errors import EmptyDocument, IocGraphError, MalformedRecord
from .ingest import (
    DocumentDraft,
    SourceKind,
    parse_av_scan,
    parse_crawler_record,
    parse_raw_text,
)
from .store import CommitOutcome, CommitStatus, GraphStore

logger = logging.getLogger(__name__)

DEFAULT_SOURCE_VOCAB = frozenset(
    {
        "threat_report",
        "fireeye",
        "proofpoint",
        "exploitdb",
        "hackernews",
        "blog",
        "news",
        "social",
        "forum",
        "github",
        "pastebin",
        "bulletin",
        "misc",
    }
)


@dataclass
class EngineConfig:
    store_path: str | None = None
    malware_names_path: str | None = None
    apt_names_path: str | None = None
    file_extensions_path: str | None = None
    tlds_path: str | None = None
    domain_suppression_path: str | None = None
    cvss_feed_path: str | None = None
    entropy_threshold: float = 3.0
    refang: bool = True
    min_phone_digits: int = 7
    source_vocab: frozenset[str] = DEFAULT_SOURCE_VOCAB
    preview_length: int = 2048
    max_depth: int = 4
    node_budget: int = 100_000
    max_document_bytes: int = 4 * 1024 * 1024

    @classmethod
    def from_file(cls, path: str | Path) -> "EngineConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise IocGraphError(f"unknown config keys: {sorted(unknown)}")
        if "source_vocab" in raw:
            raw["source_vocab"] = frozenset(t.lower() for t in raw["source_vocab"])
        return cls(**raw)


@dataclass
class IngestSummary:
    committed: int = 0
    duplicates: int = 0
    zero_degree: int = 0
    errors: int = 0
    error_messages: list[str] = field(default_factory=list)

    def add_outcome(self, outcome: CommitOutcome) -> None:
        if outcome.status is CommitStatus.COMMITTED:
            self.committed += 1
        elif outcome.status is CommitStatus.SKIPPED_DUPLICATE:
            self.duplicates += 1
        else:
            self.zero_degree += 1

    def add_error(self, message: str) -> None:
        self.errors += 1
        self.error_messages.append(message)

    def merge(self, other: "IngestSummary") -> None:
        self.committed += other.committed
        self.duplicates += other.duplicates
        self.zero_degree += other.zero_degree
        self.errors += other.errors
        self.error_messages.extend(other.error_messages)


class Engine:
    def __init__(
        self,
        store: GraphStore,
        config: EngineConfig | None = None,
        extraction_config: extraction.ExtractionConfig | None = None,
        enricher: Enricher | None = None,
    ):
        self.config = config or EngineConfig()
        self.store = store
        self.extraction_config = extraction_config or extraction.default_config(
            entropy_threshold=self.config.entropy_threshold,
            refang=self.config.refang,
            min_phone_digits=self.config.min_phone_digits,
        )
        self.enricher = enricher or default_enricher()
        self.cvss_feed = None
        if self.config.cvss_feed_path:
            from .analytics import load_cvss_feed

            self.cvss_feed = load_cvss_feed(self.config.cvss_feed_path)

    @classmethod
    def from_config(cls, config: EngineConfig) -> "Engine":
        store = GraphStore(config.store_path)
        ext = extraction.load_extraction_config(
            malware_path=config.malware_names_path,
            apt_path=config.apt_names_path,
            extensions_path=config.file_extensions_path,
            tlds_path=config.tlds_path,
            suppression_path=config.domain_suppression_path,
            entropy_threshold=config.entropy_threshold,
            refang=config.refang,
            min_phone_digits=config.min_phone_digits,
        )
        return cls(store=store, config=config, extraction_config=ext)

    # -- single-document ingestion -------------------------------------------

    def _commit_draft(self, draft: DocumentDraft) -> CommitOutcome:
        if self.store.has_checksum(draft.checksum):
            # Cheap pre-check so duplicates skip extraction; the commit
            # itself re-checks under the writer lock.
            return CommitOutcome(CommitStatus.SKIPPED_DUPLICATE, draft.checksum)
        if draft.skip_text_analysis:
            matches, enrichment = [], None
        else:
            matches = extraction.extract_all(draft.raw_text, self.extraction_config)
            enrichment = self.enricher.enrich(draft.raw_text)
        return self.store.commit_document(draft, matches, enrichment)

    def ingest_raw_text(self, data: bytes) -> CommitOutcome:
        return self._commit_draft(parse_raw_text(data))

    def ingest_crawler_record(self, record: bytes | str | Mapping) -> CommitOutcome:
        return self._commit_draft(parse_crawler_record(record, source_vocab=self.config.source_vocab))

    def ingest_av_scan(self, record: bytes | str | Mapping) -> CommitOutcome:
        return self._commit_draft(parse_av_scan(record))

    # -- batch ingestion --------------------------------------------------------

    def ingest_file(self, path: Path, source: SourceKind) -> IngestSummary:
        """One raw-text file is one document; jsonl sources are one per line."""
        summary = IngestSummary()
        try:
            data = path.read_bytes()
        except OSError as exc:
            summary.add_error(f"{path}: {exc}")
            return summary
        if len(data) > self.config.max_document_bytes:
            summary.add_error(f"{path}: exceeds max document size")
            return summary

        if source is SourceKind.RAW_TEXT:
            try:
                summary.add_outcome(self.ingest_raw_text(data))
            except IocGraphError as exc:
                summary.add_error(f"{path}: {exc}")
            return summary

        ingest_line = (
            self.ingest_crawler_record if source is SourceKind.CRAWLER else self.ingest_av_scan
        )
        for lineno, line in enumerate(data.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                summary.add_outcome(ingest_line(line))
            except (MalformedRecord, EmptyDocument) as exc:
                summary.add_error(f"{path}:{lineno}: {exc}")
        return summary

    def ingest_paths(
        self, paths: Iterable[str | Path], source: SourceKind, recursive: bool = False
    ) -> IngestSummary:
        summary = IngestSummary()
        for p in paths:
            p = Path(p)
            if p.is_dir():
                if recursive:
                    children = sorted(c for c in p.rglob("*") if c.is_file())
                else:
                    children = sorted(c for c in p.iterdir() if c.is_file())
                for child in children:
                    summary.merge(self.ingest_file(child, source))
            elif p.is_file():
                summary.merge(self.ingest_file(p, source))
            else:
                summary.add_error(f"{p}: not a readable file or directory")
        return summary

    def close(self) -> None:
        self.store.close()
