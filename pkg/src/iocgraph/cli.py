"""Operator command line: ingest, query, analyze, export, serve.

Exit codes are a stable scripting contract: 0 success, 1 user error,
2 data error, 3 internal error.
"""

from __future__ import annotations

import json
import sys
from dataclasses import replace
from pathlib import Path

import click

from . import analytics, exports
from .enrichment import TopicLabel
from .errors import (
    ArgumentError,
    DegenerateInput,
    EmptyDocument,
    IocGraphError,
    LoadError,
    MalformedRecord,
    NotFound,
    StoreError,
)
from .indicators import DOCUMENT_COLOR, TYPE_COLORS, IndicatorType
from .ingest import SourceKind
from .pipeline import Engine, EngineConfig
from .store import DocumentNode, IndicatorNode, IndicatorSeed, QueryFilter

EXIT_OK = 0
EXIT_USER = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

_TOPIC_ALIASES = {
    "cyber": TopicLabel.CYBERSECURITY,
    "cybersecurity": TopicLabel.CYBERSECURITY,
    "noncyber": TopicLabel.NOT_CYBERSECURITY,
    "not_cybersecurity": TopicLabel.NOT_CYBERSECURITY,
    "insufficient": TopicLabel.INSUFFICIENT_DATA,
    "insufficient_data": TopicLabel.INSUFFICIENT_DATA,
}


def _load_config(config_path: str | None, **overrides) -> EngineConfig:
    cfg = EngineConfig.from_file(config_path) if config_path else EngineConfig()
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


def _check_paths(cfg: EngineConfig) -> None:
    """Abort before touching the store if any configured path is missing."""
    for name in (
        "malware_names_path",
        "apt_names_path",
        "file_extensions_path",
        "tlds_path",
        "domain_suppression_path",
        "cvss_feed_path",
    ):
        value = getattr(cfg, name)
        if value is not None and not Path(value).exists():
            raise ArgumentError(f"{name} does not exist: {value}")


def _engine(ctx: click.Context) -> Engine:
    cfg: EngineConfig = ctx.obj["config"]
    _check_paths(cfg)
    return Engine.from_config(cfg)


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None, help="JSON config file.")
@click.option("--store", "store_path", type=click.Path(), default=None, help="Store directory (default ./iocgraph_store).")
@click.option("--entropy-threshold", type=float, default=None, help="Hash entropy gate in bits/char.")
@click.option("--refang/--no-refang", "refang_flag", default=None, help="Undo defanged indicators before matching.")
@click.option("--min-phone-digits", type=int, default=None)
@click.pass_context
def cli(ctx, config_path, store_path, entropy_threshold, refang_flag, min_phone_digits):
    """Bipartite document/indicator graph engine for OSINT text."""
    cfg = _load_config(
        config_path,
        store_path=store_path,
        entropy_threshold=entropy_threshold,
        refang=refang_flag,
        min_phone_digits=min_phone_digits,
    )
    if cfg.store_path is None:
        cfg.store_path = "./iocgraph_store"
    ctx.ensure_object(dict)
    ctx.obj["config"] = cfg


@cli.command()
@click.option("--source", type=click.Choice(["text", "crawler", "avscan"]), required=True)
@click.option("--recursive", is_flag=True, default=False)
@click.argument("paths", nargs=-1, required=True, type=click.Path())
@click.pass_context
def ingest(ctx, source, recursive, paths):
    """Run the full pipeline over files (text) or jsonl records (crawler/avscan)."""
    engine = _engine(ctx)
    try:
        summary = engine.ingest_paths(paths, SourceKind(source), recursive=recursive)
    finally:
        engine.close()
    click.echo(
        f"committed={summary.committed} duplicates={summary.duplicates} "
        f"zero_degree={summary.zero_degree} errors={summary.errors}"
    )
    for msg in summary.error_messages:
        click.echo(f"error: {msg}", err=True)
    if summary.errors:
        sys.exit(EXIT_DATA)


@cli.group()
def query():
    """Graph queries."""


def _node_line(node) -> str:
    if isinstance(node, IndicatorNode):
        return f"[{node.type.value}] {node.value}"
    assert isinstance(node, DocumentNode)
    preview = node.raw_text[:60].replace("\n", " ")
    return f"[doc] {node.checksum[:16]}… {preview!r}"


def _emit_dot(view, out) -> None:
    node_map = view.node_map()
    out("graph neighborhood {")
    out("  node [style=filled];")
    for node in view.nodes:
        if isinstance(node, IndicatorNode):
            color = TYPE_COLORS[node.type]
            label = f"{node.type.value}\\n{node.value}"
            nid = node.public_id
        else:
            color = DOCUMENT_COLOR
            label = f"doc\\n{node.checksum[:12]}…"
            nid = node.public_id
        out(f'  "{nid}" [label="{label}", fillcolor="{color}"];')
    for e in view.edges:
        doc = node_map[e.document]
        ind = node_map[e.indicator]
        color = TYPE_COLORS[e.label]
        out(f'  "{doc.public_id}" -- "{ind.public_id}" [color="{color}", label="{e.label.edge_label}"];')
    out("}")


@query.command("indicator")
@click.argument("type_name", metavar="TYPE")
@click.argument("value")
@click.option("--depth", type=int, default=1, show_default=True)
@click.option("--edges", "edge_types", default=None, help="Comma-separated edge types to traverse.")
@click.option("--lang", default=None, help="Restrict documents to a language code.")
@click.option("--topic", default=None, help="cyber | noncyber | insufficient")
@click.option("--budget", type=int, default=None, help="Node budget for the traversal.")
@click.option("--format", "fmt", type=click.Choice(["table", "jsonl", "dot"]), default="table")
@click.pass_context
def query_indicator(ctx, type_name, value, depth, edge_types, lang, topic, budget, fmt):
    """Neighborhood of one indicator node."""
    itype = IndicatorType.from_name(type_name)
    kwargs = {}
    if edge_types:
        kwargs["edge_types"] = frozenset(IndicatorType.from_name(t) for t in edge_types.split(",") if t.strip())
    if lang:
        kwargs["language"] = lang
    if topic:
        if topic.lower() not in _TOPIC_ALIASES:
            raise ArgumentError(f"unknown topic {topic!r}")
        kwargs["topic"] = _TOPIC_ALIASES[topic.lower()]
    if budget is not None:
        kwargs["node_budget"] = budget
    qfilter = QueryFilter(**kwargs)

    engine = _engine(ctx)
    try:
        snapshot = engine.store.snapshot()
        view = snapshot.neighborhood(IndicatorSeed(itype, value), depth, qfilter)
    finally:
        engine.close()

    node_map = view.node_map()
    if fmt == "dot":
        _emit_dot(view, click.echo)
    elif fmt == "jsonl":
        for node in view.nodes:
            if isinstance(node, IndicatorNode):
                click.echo(json.dumps({"kind": "ind", "type": node.type.value, "value": node.value}))
            else:
                click.echo(json.dumps({"kind": "doc", "checksum": node.checksum, "source_kind": node.source_kind.value}))
        for e in view.edges:
            click.echo(
                json.dumps(
                    {
                        "kind": "edge",
                        "doc": node_map[e.document].checksum,
                        "type": e.label.value,
                        "value": node_map[e.indicator].value,
                        "occ": e.occurrences,
                    }
                )
            )
    else:
        click.echo(f"seed: {itype.value}:{value}  depth: {depth}  nodes: {len(view.nodes)}  edges: {len(view.edges)}")
        if view.truncated:
            click.echo("(truncated at node budget)")
        for node in view.nodes:
            click.echo("  " + _node_line(node))
        for e in view.edges:
            click.echo(
                f"  {node_map[e.document].checksum[:16]}… --{e.label.edge_label}/{e.occurrences}--> "
                f"{node_map[e.indicator].value}"
            )


@cli.group()
def analyze():
    """Graph analytics reports."""


def _write_report(payload: str, out: str | None) -> None:
    if out:
        Path(out).write_text(payload, encoding="utf-8")
    else:
        click.echo(payload, nl=False)


@analyze.command("stats")
@click.option("--out", default=None, type=click.Path())
@click.pass_context
def analyze_stats(ctx, out):
    """Node and edge counts per indicator type."""
    engine = _engine(ctx)
    try:
        report = engine.store.stats()
    finally:
        engine.close()
    lines = [f"documents: {report.documents}"]
    lines.append(f"{'type':<12} {'nodes':>8} {'edges':>8}")
    for itype in IndicatorType:
        ts = report.per_type[itype]
        lines.append(f"{itype.value:<12} {ts.nodes:>8} {ts.edges:>8}")
    _write_report("\n".join(lines) + "\n", out)


@analyze.command("pagerank")
@click.option("--type", "type_name", default="cve", show_default=True)
@click.option("--top", "k", type=int, default=11, show_default=True)
@click.option("--damping", type=float, default=0.75, show_default=True)
@click.option("--max-iterations", type=int, default=300, show_default=True)
@click.option("--out", default=None, type=click.Path())
@click.pass_context
def analyze_pagerank(ctx, type_name, k, damping, max_iterations, out):
    """Top indicator nodes of a type ranked by PageRank score."""
    itype = IndicatorType.from_name(type_name)
    params = analytics.PageRankParams(damping=damping, max_iterations=max_iterations)
    engine = _engine(ctx)
    try:
        snapshot = engine.store.snapshot()
        result = analytics.pagerank(snapshot, params)
        ranked = analytics.top_indicators_by_pagerank(result, snapshot, itype, k)
    finally:
        engine.close()
    lines = [f"{'rank':<6}{'value':<24} score"]
    for i, (value, score) in enumerate(ranked, start=1):
        lines.append(f"{i:<6}{value:<24} {score:.4f}")
    lines.append(f"(iterations={result.iterations} converged={result.converged})")
    _write_report("\n".join(lines) + "\n", out)


def _parse_restriction(raw: str | None) -> analytics.DegreeRestriction:
    if not raw:
        return analytics.DegreeRestriction()
    path = Path(raw)
    text = path.read_text(encoding="utf-8") if path.exists() else raw
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArgumentError(f"--restrict must be JSON or a JSON file: {exc}") from None
    return analytics.DegreeRestriction(
        source_tags=frozenset(t.lower() for t in obj["source_tags"]) if obj.get("source_tags") else None,
        min_degree=obj.get("min_degree", 0),
        year_window=tuple(obj["year_window"]) if obj.get("year_window") else None,
        metric=analytics.CorrelationMetric(obj.get("metric", "degree")),
        cvss_version=analytics.CvssVersion(obj.get("cvss_version", "v3")),
        min_pagerank=obj.get("min_pagerank"),
    )


@analyze.command("cvss")
@click.option("--feed", "feed_path", type=click.Path(), default=None, help="CVSS CSV; defaults to the configured feed.")
@click.option("--restrict", "restrict_raw", default=None, help="Restriction settings as JSON or a JSON file.")
@click.option("--out", default=None, type=click.Path())
@click.pass_context
def analyze_cvss(ctx, feed_path, restrict_raw, out):
    """Pearson correlation between CVE CVSS scores and graph prominence."""
    cfg: EngineConfig = ctx.obj["config"]
    feed_path = feed_path or cfg.cvss_feed_path
    if feed_path is None:
        raise ArgumentError("no CVSS feed: pass --feed or configure cvss_feed_path")
    if not Path(feed_path).exists():
        raise ArgumentError(f"feed does not exist: {feed_path}")
    restriction = _parse_restriction(restrict_raw)
    feed = analytics.load_cvss_feed(feed_path)
    engine = _engine(ctx)
    try:
        snapshot = engine.store.snapshot()
        report = analytics.cvss_correlation(snapshot, feed, restriction)
    finally:
        engine.close()
    payload = json.dumps(analytics.correlation_report_json(report), indent=2) + "\n"
    _write_report(payload, out)


@cli.command("export")
@click.option("--format", "fmt", type=click.Choice(list(exports.ExportFormat.ALL)), required=True)
@click.option("--out", required=True, type=click.Path())
@click.pass_context
def export_cmd(ctx, fmt, out):
    """Serialize the store to cypher, graphml, or jsonl."""
    engine = _engine(ctx)
    try:
        exports.export(engine.store.snapshot(), fmt, out)
    finally:
        engine.close()
    click.echo(f"wrote {fmt} export to {out}")


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8377, show_default=True)
@click.option("--ui-dir", default=None, type=click.Path(), help="Directory of built explorer UI assets.")
@click.pass_context
def serve(ctx, host, port, ui_dir):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    engine = _engine(ctx)
    app = create_app(engine, ui_dir=ui_dir)
    try:
        uvicorn.run(app, host=host, port=port, log_level="info")
    finally:
        engine.close()


def main() -> None:
    try:
        cli.main(standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(EXIT_USER)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_USER)
    except (NotFound, ArgumentError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USER)
    except (MalformedRecord, EmptyDocument, LoadError, StoreError, DegenerateInput) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DATA)
    except SystemExit:
        raise
    except IocGraphError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DATA)
    except Exception as exc:  # pragma: no cover - truly unexpected
        click.echo(f"internal error: {exc}", err=True)
        sys.exit(EXIT_INTERNAL)


if __name__ == "__main__":
    main()
