"""Request/response schemas for the /v1 HTTP interface."""

from __future__ import annotations

from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, Field


class TextIngest(BaseModel):
    source_kind: Literal["text"]
    text: str


class CrawlerIngest(BaseModel):
    source_kind: Literal["crawler"]
    record: dict[str, Any]


class AvScanIngest(BaseModel):
    source_kind: Literal["avscan"]
    record: dict[str, Any]


IngestRequest = Annotated[
    Union[TextIngest, CrawlerIngest, AvScanIngest],
    Field(discriminator="source_kind"),
]


class IngestResponse(BaseModel):
    status: Literal["committed", "skipped_duplicate", "skipped_zero_degree"]
    checksum: str
    doc_id: int | None = None


class IndicatorSummary(BaseModel):
    type: str
    value: str
    degree: int


class GraphNode(BaseModel):
    id: str
    kind: Literal["doc", "ind"]
    # indicator fields
    type: str | None = None
    value: str | None = None
    degree: int | None = None
    # document fields (raw_text truncated to the preview length)
    checksum: str | None = None
    source_kind: str | None = None
    raw_text: str | None = None
    text_truncated: bool | None = None
    language: str | None = None
    topic: str | None = None
    source_tag: str | None = None


class GraphEdgeModel(BaseModel):
    doc: str
    type: str
    value: str
    occurrences: int


class NeighborhoodResponse(BaseModel):
    seed: str
    depth: int
    nodes: list[GraphNode]
    edges: list[GraphEdgeModel]
    frontier: list[str]
    truncated: bool


class DocumentResponse(BaseModel):
    checksum: str
    source_kind: str
    raw_text: str
    ingested_at: str | None = None
    crawler_meta: dict[str, Any] | None = None
    avscan_meta: dict[str, Any] | None = None
    enrichment: dict[str, Any] | None = None
    match_summary: list[tuple[str, str, int]]


class TypeStatsModel(BaseModel):
    nodes: int
    edges: int


class StatsResponse(BaseModel):
    documents: int
    indicators: dict[str, TypeStatsModel]


class PageRankEntry(BaseModel):
    rank: int
    value: str
    score: float


class PageRankResponse(BaseModel):
    type: str
    k: int
    damping: float
    max_iterations: int
    tolerance: float
    iterations: int
    converged: bool
    results: list[PageRankEntry]


class CorrelationRequest(BaseModel):
    source_tags: list[str] | None = None
    min_degree: int = 0
    year_window: tuple[int, int] | None = None
    metric: Literal["degree", "pagerank"] = "degree"
    cvss_version: Literal["v2", "v3"] = "v3"
    min_pagerank: float | None = None


class CorrelationResponse(BaseModel):
    r: float
    n: int
    points: list[tuple[float, float]]
    config: dict[str, Any]


class ErrorBody(BaseModel):
    code: Literal["NotFound", "BadRequest", "Conflict", "TooLarge", "Internal"]
    message: str
