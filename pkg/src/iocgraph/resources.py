"""Loaders for the bundled dictionary and profile files.

All list files share one format: one entry per line, ``#`` starts a
comment, blank lines ignored. The domain suppression list is CSV in the
top-1M convention (``rank,domain``).
"""

from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path


def _bundled(name: str) -> str:
    return resources.files("iocgraph.data").joinpath(name).read_text(encoding="utf-8")


def parse_wordlist(text: str) -> frozenset[str]:
    entries = set()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        entries.add(line.lower())
    return frozenset(entries)


def load_wordlist(path: str | Path | None, bundled_name: str) -> frozenset[str]:
    if path is None:
        return parse_wordlist(_bundled(bundled_name))
    return parse_wordlist(Path(path).read_text(encoding="utf-8"))


def parse_suppression_csv(text: str) -> frozenset[str]:
    domains = set()
    for row in csv.reader(text.splitlines()):
        if not row:
            continue
        # Accept both "rank,domain" rows and bare-domain lines.
        cell = row[1] if len(row) > 1 else row[0]
        cell = cell.strip().lower()
        if cell and not cell.startswith("#"):
            domains.add(cell)
    return frozenset(domains)


def load_suppression(path: str | Path | None) -> frozenset[str]:
    if path is None:
        return parse_suppression_csv(_bundled("top_domains.csv"))
    return parse_suppression_csv(Path(path).read_text(encoding="utf-8"))


def load_stopword_profiles() -> dict[str, frozenset[str]]:
    profiles = {}
    for code in ("en", "es", "de", "fr"):
        profiles[code] = parse_wordlist(_bundled(f"stopwords_{code}.txt"))
    return profiles


def load_cyber_lexicon(path: str | Path | None = None) -> frozenset[str]:
    return load_wordlist(path, "cyber_lexicon.txt")


def parse_keyword_table(text: str) -> dict[str, str]:
    table = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        phrase, _, tid = line.partition("\t")
        phrase = phrase.strip().lower()
        tid = tid.strip().upper()
        if not phrase or not tid:
            raise ValueError(f"bad keyword table line {lineno}: {line!r}")
        table[phrase] = tid
    return table


def load_keyword_table(path: str | Path | None = None) -> dict[str, str]:
    if path is None:
        return parse_keyword_table(_bundled("technique_keywords.tsv"))
    return parse_keyword_table(Path(path).read_text(encoding="utf-8"))
