"""Graph analytics: PageRank, degree/CVSS correlation, feed loading.

PageRank uses the non-normalized undirected form
    score(n) = (1 - d) + d * sum_{m in N(n)} score(m) / deg(m)
iterated from all-ones, which is the variant whose scores grow with
graph size instead of summing to 1; damping defaults to 0.75 and the
iteration cap to 300.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import IO, Mapping, Sequence

from .errors import ArgumentError, DegenerateInput
from .indicators import IndicatorType, cve_year
from .store import GraphSnapshot

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# PageRank


@dataclass(frozen=True)
class PageRankParams:
    damping: float = 0.75
    max_iterations: int = 300
    tolerance: float = 1e-7

    def __post_init__(self):
        if not 0.0 < self.damping < 1.0:
            raise ArgumentError("damping must be in (0, 1)")
        if self.max_iterations < 1:
            raise ArgumentError("max_iterations must be positive")
        if self.tolerance < 0.0:
            raise ArgumentError("tolerance must be non-negative")


@dataclass(frozen=True)
class PageRankResult:
    scores: dict[int, float]
    iterations: int
    converged: bool


def pagerank(snapshot: GraphSnapshot, params: PageRankParams | None = None) -> PageRankResult:
    """Fixed point of the non-normalized recurrence over the whole graph."""
    params = params or PageRankParams()
    node_ids = snapshot.node_ids()
    if not node_ids:
        raise ArgumentError("pagerank is undefined on an empty graph")

    neighbors = {nid: sorted(snapshot.neighbors(nid)) for nid in node_ids}
    degree = {nid: len(nbrs) for nid, nbrs in neighbors.items()}
    scores = {nid: 1.0 for nid in node_ids}
    base = 1.0 - params.damping

    iterations = 0
    converged = False
    for iterations in range(1, params.max_iterations + 1):
        nxt = {}
        for nid in node_ids:
            acc = 0.0
            for m in neighbors[nid]:
                acc += scores[m] / degree[m]
            nxt[nid] = base + params.damping * acc
        delta = max(abs(nxt[nid] - scores[nid]) for nid in node_ids)
        scores = nxt
        if delta < params.tolerance:
            converged = True
            break
    return PageRankResult(scores=scores, iterations=iterations, converged=converged)


def top_indicators_by_pagerank(
    result: PageRankResult | Mapping[int, float],
    snapshot: GraphSnapshot,
    itype: IndicatorType,
    k: int,
) -> list[tuple[str, float]]:
    """The k best-scoring indicator nodes of one type, ties by value."""
    if k <= 0:
        raise ArgumentError("k must be positive")
    scores = result.scores if isinstance(result, PageRankResult) else result
    ranked = sorted(
        ((node.value, scores.get(node.id, 0.0)) for node in snapshot.indicators() if node.type is itype),
        key=lambda pair: (-pair[1], pair[0]),
    )
    return ranked[:k]


# ---------------------------------------------------------------------------
# Pearson correlation


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson r; degenerate inputs raise instead of returning NaN."""
    n = len(xs)
    if n != len(ys):
        raise DegenerateInput(f"series lengths differ ({n} vs {len(ys)})", n=min(n, len(ys)))
    if n < 2:
        raise DegenerateInput(f"need at least 2 datapoints, got {n}", n=n)
    mean_x = math.fsum(xs) / n
    mean_y = math.fsum(ys) / n
    num = math.fsum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    var_x = math.fsum((x - mean_x) ** 2 for x in xs)
    var_y = math.fsum((y - mean_y) ** 2 for y in ys)
    if var_x == 0.0 or var_y == 0.0:
        raise DegenerateInput("zero variance in one of the series", n=n)
    return num / math.sqrt(var_x * var_y)


# ---------------------------------------------------------------------------
# CVSS feed


@dataclass(frozen=True)
class CvssRecord:
    cve_id: str
    v2: float | None
    v3: float | None
    published_year: int

    def score(self, version: "CvssVersion") -> float | None:
        return self.v2 if version is CvssVersion.V2 else self.v3


class CvssVersion(str, Enum):
    V2 = "v2"
    V3 = "v3"


class CvssFeed(Mapping):
    """cve_id -> CvssRecord map plus a count of rejected feed rows."""

    def __init__(self, records: dict[str, CvssRecord], rejected: int = 0):
        self._records = records
        self.rejected = rejected

    def __getitem__(self, key: str) -> CvssRecord:
        return self._records[key.upper()]

    def __iter__(self):
        return iter(self._records)

    def __len__(self) -> int:
        return len(self._records)


def _parse_score(cell: str) -> float | None:
    cell = cell.strip()
    if not cell:
        return None
    score = float(cell)
    if not 0.0 <= score <= 10.0:
        raise ValueError(f"score {score} outside [0, 10]")
    return score


def load_cvss_feed(source: str | Path | IO[str]) -> CvssFeed:
    """Parse the simplified CSV distillation of the NVD data.

    Header: cve_id,cvss_v2,cvss_v3,published_year. Empty score cells
    mean the version was never assigned; rows with out-of-range scores
    or no score at all are rejected (counted, logged, not fatal).
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text(encoding="utf-8")

    records: dict[str, CvssRecord] = {}
    rejected = 0
    rows = csv.reader(text.splitlines())
    for lineno, row in enumerate(rows, start=1):
        if not row or row[0].strip().lower() in ("", "cve_id"):
            continue
        try:
            cve_id = row[0].strip().upper()
            v2 = _parse_score(row[1]) if len(row) > 1 else None
            v3 = _parse_score(row[2]) if len(row) > 2 else None
            year_cell = row[3].strip() if len(row) > 3 else ""
            year = int(year_cell) if year_cell else cve_year(cve_id)
            if v2 is None and v3 is None:
                raise ValueError("record carries neither a v2 nor a v3 score")
            records[cve_id] = CvssRecord(cve_id=cve_id, v2=v2, v3=v3, published_year=year)
        except (ValueError, ArgumentError) as exc:
            rejected += 1
            logger.warning("cvss feed line %d rejected: %s", lineno, exc)
    return CvssFeed(records, rejected=rejected)


# ---------------------------------------------------------------------------
# degree / PageRank vs CVSS correlation


class CorrelationMetric(str, Enum):
    DEGREE = "degree"
    PAGERANK = "pagerank"


@dataclass(frozen=True)
class DegreeRestriction:
    """Which CVE nodes enter the correlation, and with which metric.

    source_tags restricts degree counting to documents from those
    sources; min_degree drops weakly-referenced CVEs (degree 1 noise);
    year_window keeps only CVEs published inside the crawl era;
    min_pagerank applies instead of min_degree for the PageRank metric.
    """

    source_tags: frozenset[str] | None = None
    min_degree: int = 0
    year_window: tuple[int, int] | None = None
    metric: CorrelationMetric = CorrelationMetric.DEGREE
    cvss_version: CvssVersion = CvssVersion.V3
    min_pagerank: float | None = None


@dataclass(frozen=True)
class CorrelationReport:
    r: float
    n: int
    points: tuple[tuple[float, float], ...]   # (cvss score, metric value)
    config: DegreeRestriction


def _restricted_degree(snapshot: GraphSnapshot, node_id: int, tags: frozenset[str] | None) -> int:
    if tags is None:
        return snapshot.degree(node_id)
    count = 0
    for doc_id in snapshot.neighbors(node_id):
        doc = snapshot.node(doc_id)
        meta = getattr(doc, "crawler_meta", None)
        if meta is not None and meta.source_tag in tags:
            count += 1
    return count


def cvss_correlation(
    snapshot: GraphSnapshot,
    feed: CvssFeed,
    restriction: DegreeRestriction | None = None,
    pagerank_result: PageRankResult | None = None,
) -> CorrelationReport:
    """Pearson r between CVE CVSS scores and a graph prominence metric.

    CVEs missing the requested CVSS version, outside the year window,
    or below the metric floor are dropped before correlating.
    """
    restriction = restriction or DegreeRestriction()
    if restriction.metric is CorrelationMetric.PAGERANK and pagerank_result is None:
        pagerank_result = pagerank(snapshot)

    points: list[tuple[float, float]] = []
    for node in snapshot.indicators():
        if node.type is not IndicatorType.CVE:
            continue
        record = feed.get(node.value)
        if record is None:
            continue
        score = record.score(restriction.cvss_version)
        if score is None:
            continue
        if restriction.year_window is not None:
            lo, hi = restriction.year_window
            if not lo <= record.published_year <= hi:
                continue
        if restriction.metric is CorrelationMetric.DEGREE:
            metric = float(_restricted_degree(snapshot, node.id, restriction.source_tags))
            if metric < restriction.min_degree:
                continue
            if metric == 0.0 and restriction.source_tags is not None and restriction.min_degree == 0:
                # A CVE with no edges from allowed sources is not a datapoint.
                continue
        else:
            metric = pagerank_result.scores.get(node.id, 0.0)
            if restriction.min_pagerank is not None and metric < restriction.min_pagerank:
                continue
        points.append((score, metric))

    n = len(points)
    if n < 2:
        raise DegenerateInput(f"only {n} CVE datapoint(s) survive the restriction", n=n)
    try:
        r = pearson([p[0] for p in points], [p[1] for p in points])
    except DegenerateInput as exc:
        raise DegenerateInput(str(exc), n=n) from None
    return CorrelationReport(r=r, n=n, points=tuple(points), config=restriction)


def correlation_report_json(report: CorrelationReport) -> dict:
    """Structured report for files and HTTP responses (config echo included)."""
    cfg = report.config
    return {
        "r": report.r,
        "n": report.n,
        "points": [[s, m] for s, m in report.points],
        "config": {
            "source_tags": sorted(cfg.source_tags) if cfg.source_tags is not None else None,
            "min_degree": cfg.min_degree,
            "year_window": list(cfg.year_window) if cfg.year_window is not None else None,
            "metric": cfg.metric.value,
            "cvss_version": cfg.cvss_version.value,
            "min_pagerank": cfg.min_pagerank,
        },
    }
