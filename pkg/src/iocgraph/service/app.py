"""FastAPI application wrapping an Engine.

All write traffic funnels through the store's single writer; reads run
on immutable snapshots, so handlers never observe partial commits.
"""

from __future__ import annotations

import logging
from pathlib import Path

from fastapi import Body, FastAPI, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .. import analytics
from ..enrichment import TopicLabel
from ..errors import (
    ArgumentError,
    DegenerateInput,
    EmptyDocument,
    IocGraphError,
    MalformedRecord,
    NotFound,
)
from ..indicators import IndicatorType
from ..ingest import parse_timestamp
from ..pipeline import Engine
from ..store import (
    DocumentNode,
    GraphSnapshot,
    IndicatorNode,
    IndicatorSeed,
    QueryFilter,
    SubgraphView,
)
from ..store import document_payload
from . import models

logger = logging.getLogger(__name__)


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def _parse_type(name: str) -> IndicatorType:
    return IndicatorType.from_name(name)


def _node_model(node, snapshot: GraphSnapshot, preview: int) -> models.GraphNode:
    if isinstance(node, IndicatorNode):
        return models.GraphNode(
            id=node.public_id,
            kind="ind",
            type=node.type.value,
            value=node.value,
            degree=snapshot.degree(node.id),
        )
    assert isinstance(node, DocumentNode)
    text = node.raw_text
    truncated = len(text) > preview
    enrichment = node.enrichment
    return models.GraphNode(
        id=node.public_id,
        kind="doc",
        checksum=node.checksum,
        source_kind=node.source_kind.value,
        raw_text=text[:preview],
        text_truncated=truncated,
        language=enrichment.language.language if enrichment else None,
        topic=enrichment.topic.value if enrichment else None,
        source_tag=node.crawler_meta.source_tag if node.crawler_meta else None,
    )


def _view_response(view: SubgraphView, snapshot: GraphSnapshot, depth: int, preview: int) -> models.NeighborhoodResponse:
    node_map = view.node_map()
    edges = []
    for e in view.edges:
        doc = node_map[e.document]
        ind = node_map[e.indicator]
        edges.append(
            models.GraphEdgeModel(
                doc=doc.checksum, type=e.label.value, value=ind.value, occurrences=e.occurrences
            )
        )
    seed_node = snapshot.node(view.seed)
    return models.NeighborhoodResponse(
        seed=seed_node.public_id,
        depth=depth,
        nodes=[_node_model(n, snapshot, preview) for n in view.nodes],
        edges=edges,
        frontier=[node_map[nid].public_id for nid in view.frontier],
        truncated=view.truncated,
    )


def _build_filter(
    edge_types: str | None,
    language: str | None,
    topic: str | None,
    source_tags: str | None,
    time_from: str | None,
    time_to: str | None,
    budget: int | None,
    default_budget: int,
) -> QueryFilter:
    kwargs = {}
    if edge_types:
        kwargs["edge_types"] = frozenset(_parse_type(t.strip()) for t in edge_types.split(",") if t.strip())
    if language:
        kwargs["language"] = language
    if topic:
        try:
            kwargs["topic"] = TopicLabel(topic)
        except ValueError:
            raise ArgumentError(f"unknown topic label {topic!r}") from None
    if source_tags:
        kwargs["source_tags"] = frozenset(t.strip().lower() for t in source_tags.split(",") if t.strip())
    if time_from or time_to:
        lo = parse_timestamp(time_from, "from") if time_from else parse_timestamp("1970-01-01T00:00:00Z", "from")
        hi = parse_timestamp(time_to, "to") if time_to else parse_timestamp("9999-12-31T23:59:59Z", "to")
        kwargs["time_window"] = (lo, hi)
    kwargs["node_budget"] = budget if budget is not None else default_budget
    return QueryFilter(**kwargs)


def create_app(engine: Engine, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="iocgraph", version="0.1.0")
    app.state.engine = engine
    cfg = engine.config

    @app.exception_handler(NotFound)
    async def _nf(request: Request, exc: NotFound):
        return _error(404, "NotFound", str(exc))

    @app.exception_handler(ArgumentError)
    async def _arg(request: Request, exc: ArgumentError):
        return _error(400, "BadRequest", str(exc))

    @app.exception_handler(MalformedRecord)
    async def _mal(request: Request, exc: MalformedRecord):
        return _error(400, "BadRequest", str(exc))

    @app.exception_handler(EmptyDocument)
    async def _empty(request: Request, exc: EmptyDocument):
        return _error(400, "BadRequest", str(exc))

    @app.exception_handler(DegenerateInput)
    async def _degen(request: Request, exc: DegenerateInput):
        return _error(400, "BadRequest", f"{exc} (n={exc.n})")

    @app.exception_handler(IocGraphError)
    async def _other(request: Request, exc: IocGraphError):
        logger.exception("internal error")
        return _error(500, "Internal", str(exc))

    # -- ingestion -----------------------------------------------------------

    @app.post("/v1/documents", response_model=models.IngestResponse)
    def ingest_document(body: models.IngestRequest = Body(...)):
        if isinstance(body, models.TextIngest):
            data = body.text.encode("utf-8")
            if len(data) > cfg.max_document_bytes:
                return _error(413, "TooLarge", "document exceeds the configured size limit")
            outcome = engine.ingest_raw_text(data)
        elif isinstance(body, models.CrawlerIngest):
            outcome = engine.ingest_crawler_record(body.record)
        else:
            outcome = engine.ingest_av_scan(body.record)
        return models.IngestResponse(
            status=outcome.status.value, checksum=outcome.checksum, doc_id=outcome.doc_id
        )

    # -- lookups ---------------------------------------------------------------

    @app.get("/v1/indicators/{type_name}/{value}", response_model=models.IndicatorSummary)
    def indicator_summary(type_name: str, value: str):
        itype = _parse_type(type_name)
        snapshot = engine.store.snapshot()
        node = snapshot.find_indicator(itype, value)
        if node is None:
            raise NotFound(f"indicator {itype.value}:{value} not in store")
        return models.IndicatorSummary(type=itype.value, value=node.value, degree=snapshot.degree(node.id))

    @app.get("/v1/indicators/{type_name}/{value}/neighborhood", response_model=models.NeighborhoodResponse)
    def indicator_neighborhood(
        type_name: str,
        value: str,
        depth: int = Query(default=1),
        edge_types: str | None = Query(default=None),
        language: str | None = Query(default=None),
        topic: str | None = Query(default=None),
        source_tags: str | None = Query(default=None),
        time_from: str | None = Query(default=None, alias="from"),
        time_to: str | None = Query(default=None, alias="to"),
        budget: int | None = Query(default=None),
    ):
        if not 1 <= depth <= cfg.max_depth:
            raise ArgumentError(f"depth must be in [1, {cfg.max_depth}]")
        itype = _parse_type(type_name)
        qfilter = _build_filter(
            edge_types, language, topic, source_tags, time_from, time_to, budget, cfg.node_budget
        )
        snapshot = engine.store.snapshot()
        view = snapshot.neighborhood(IndicatorSeed(itype, value), depth, qfilter)
        return _view_response(view, snapshot, depth, cfg.preview_length)

    @app.get("/v1/documents/{checksum}", response_model=models.DocumentResponse)
    def get_document(checksum: str):
        doc = engine.store.find_document(checksum)
        if doc is None:
            raise NotFound(f"document {checksum} not in store")
        return models.DocumentResponse(**document_payload(doc))

    @app.get("/v1/documents/{checksum}/neighborhood", response_model=models.NeighborhoodResponse)
    def document_neighborhood(
        checksum: str,
        depth: int = Query(default=1),
        edge_types: str | None = Query(default=None),
        language: str | None = Query(default=None),
        topic: str | None = Query(default=None),
        source_tags: str | None = Query(default=None),
        time_from: str | None = Query(default=None, alias="from"),
        time_to: str | None = Query(default=None, alias="to"),
        budget: int | None = Query(default=None),
    ):
        if not 1 <= depth <= cfg.max_depth:
            raise ArgumentError(f"depth must be in [1, {cfg.max_depth}]")
        snapshot = engine.store.snapshot()
        doc = snapshot.find_document(checksum)
        if doc is None:
            raise NotFound(f"document {checksum} not in store")
        qfilter = _build_filter(
            edge_types, language, topic, source_tags, time_from, time_to, budget, cfg.node_budget
        )
        view = snapshot.neighborhood(doc, depth, qfilter)
        return _view_response(view, snapshot, depth, cfg.preview_length)

    # -- stats and analytics ------------------------------------------------------

    @app.get("/v1/stats", response_model=models.StatsResponse)
    def stats():
        report = engine.store.stats()
        return models.StatsResponse(
            documents=report.documents,
            indicators={
                itype.value: models.TypeStatsModel(nodes=ts.nodes, edges=ts.edges)
                for itype, ts in report.per_type.items()
            },
        )

    @app.get("/v1/analytics/pagerank", response_model=models.PageRankResponse)
    def pagerank_top(type_name: str = Query(default="cve", alias="type"), k: int = Query(default=11)):
        itype = _parse_type(type_name)
        snapshot = engine.store.snapshot()
        params = analytics.PageRankParams()
        result = analytics.pagerank(snapshot, params)
        ranked = analytics.top_indicators_by_pagerank(result, snapshot, itype, k)
        return models.PageRankResponse(
            type=itype.value,
            k=k,
            damping=params.damping,
            max_iterations=params.max_iterations,
            tolerance=params.tolerance,
            iterations=result.iterations,
            converged=result.converged,
            results=[
                models.PageRankEntry(rank=i + 1, value=v, score=s) for i, (v, s) in enumerate(ranked)
            ],
        )

    @app.post("/v1/analytics/cvss-correlation", response_model=models.CorrelationResponse)
    def cvss_correlation(body: models.CorrelationRequest):
        if engine.cvss_feed is None:
            return _error(409, "Conflict", "no CVSS feed loaded; configure cvss_feed_path")
        restriction = analytics.DegreeRestriction(
            source_tags=frozenset(t.lower() for t in body.source_tags) if body.source_tags else None,
            min_degree=body.min_degree,
            year_window=body.year_window,
            metric=analytics.CorrelationMetric(body.metric),
            cvss_version=analytics.CvssVersion(body.cvss_version),
            min_pagerank=body.min_pagerank,
        )
        snapshot = engine.store.snapshot()
        report = analytics.cvss_correlation(snapshot, engine.cvss_feed, restriction)
        payload = analytics.correlation_report_json(report)
        return models.CorrelationResponse(**payload)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
