"""Language detection and classifier metadata for natural-language documents.

The topic and technique classifiers are interface slots with
deterministic baselines: the real tools these slots stand in for are
external ML models, so the baselines exist to make the pipeline
testable end to end and to fix the gating semantics (English-only,
minimum token count). Swap in a real model with register_mapper /
register_topic_classifier.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Protocol

from .errors import UnknownMapper
from .indicators import IndicatorType, canonical_value
from . import resources

# Below this many alphabetic tokens there is not enough signal to call
# a language, and therefore nothing downstream may classify.
TOKEN_FLOOR = 20

_WORD = re.compile(r"[^\W\d_]+", re.UNICODE)


class TopicLabel(str, Enum):
    CYBERSECURITY = "cybersecurity"
    NOT_CYBERSECURITY = "not_cybersecurity"
    INSUFFICIENT_DATA = "insufficient_data"


class MapperSlot(str, Enum):
    """The two technique-mapper seats (tactics-report and report-mapper styles)."""

    REPORT_TACTICS = "report_tactics"
    REPORT_MAPPER = "report_mapper"


@dataclass(frozen=True)
class LanguageResult:
    language: str | None
    confidence: float
    sufficient: bool

    def __post_init__(self):
        if not self.sufficient and self.language is not None:
            raise ValueError("insufficient language results carry no language code")

    @property
    def is_english(self) -> bool:
        return self.sufficient and self.language == "en"


@dataclass(frozen=True)
class TechniqueSuggestion:
    technique_id: str
    confidence: float
    mapper: MapperSlot

    def __post_init__(self):
        canonical_value(IndicatorType.TECHNIQUE, self.technique_id)


@dataclass(frozen=True)
class EnrichmentResult:
    language: LanguageResult
    topic: TopicLabel
    techniques: tuple[TechniqueSuggestion, ...] = ()


class TechniqueMapper(Protocol):
    reentrant: bool

    def map(self, text: str) -> list[tuple[str, float]]:
        """Return (technique_id, confidence) pairs for English text."""
        ...


class KeywordTableMapper:
    """Phrase-table baseline: counts keyword hits per technique id.

    Confidence is the hit count normalized by the best-hit technique,
    so the strongest suggestion is always 1.0.
    """

    reentrant = True

    def __init__(self, table: dict[str, str]):
        self._table = dict(table)
        parts = []
        for phrase in sorted(table, key=lambda p: (-len(p), p)):
            words = [re.escape(w) for w in re.split(r"[\s-]+", phrase) if w]
            parts.append(r"[\s-]+".join(words))
        self._pattern = re.compile(
            rf"(?<![A-Za-z0-9])(?:{'|'.join(parts)})(?![A-Za-z0-9])", re.IGNORECASE
        ) if parts else None

    def map(self, text: str) -> list[tuple[str, float]]:
        if self._pattern is None:
            return []
        counts: dict[str, int] = {}
        for m in self._pattern.finditer(text):
            phrase = re.sub(r"[\s-]+", " ", m.group(0).lower())
            tid = self._table.get(phrase)
            if tid:
                counts[tid] = counts.get(tid, 0) + 1
        if not counts:
            return []
        top = max(counts.values())
        return [(tid, n / top) for tid, n in counts.items()]


def _tokens(text: str) -> list[str]:
    return [t.lower() for t in _WORD.findall(text)]


class Enricher:
    """Bundles the language profiles and both classifier slots."""

    def __init__(
        self,
        stopword_profiles: dict[str, frozenset[str]] | None = None,
        cyber_lexicon: frozenset[str] | None = None,
        keyword_table: dict[str, str] | None = None,
        token_floor: int = TOKEN_FLOOR,
        topic_density: float = 0.05,
    ):
        self.profiles = stopword_profiles or resources.load_stopword_profiles()
        self.lexicon = cyber_lexicon if cyber_lexicon is not None else resources.load_cyber_lexicon()
        self.token_floor = token_floor
        self.topic_density = topic_density
        table = keyword_table if keyword_table is not None else resources.load_keyword_table()
        baseline = KeywordTableMapper(table)
        self._mappers: dict[MapperSlot, TechniqueMapper] = {
            MapperSlot.REPORT_TACTICS: baseline,
            MapperSlot.REPORT_MAPPER: baseline,
        }
        self._mapper_locks: dict[MapperSlot, threading.Lock] = {}
        self._topic_fn: Callable[[str], TopicLabel] | None = None

    # -- language ----------------------------------------------------------

    def detect_language(self, text: str) -> LanguageResult:
        """Stopword-profile overlap vote across the bundled languages."""
        tokens = _tokens(text)
        if len(tokens) < self.token_floor:
            return LanguageResult(language=None, confidence=0.0, sufficient=False)
        scores = {}
        for code, profile in self.profiles.items():
            hits = sum(1 for t in tokens if t in profile)
            scores[code] = hits / len(tokens)
        total = sum(scores.values())
        if total == 0.0:
            return LanguageResult(language=None, confidence=0.0, sufficient=False)
        best = min(sorted(scores), key=lambda c: -scores[c])
        return LanguageResult(language=best, confidence=scores[best] / total, sufficient=True)

    # -- cybersecurity topic ------------------------------------------------

    def register_topic_classifier(self, fn: Callable[[str], TopicLabel]) -> None:
        self._topic_fn = fn

    def classify_cyber_topic(self, text: str, lang: LanguageResult) -> TopicLabel:
        if not lang.is_english:
            return TopicLabel.INSUFFICIENT_DATA
        if self._topic_fn is not None:
            return self._topic_fn(text)
        tokens = _tokens(text)
        if not tokens:
            return TopicLabel.INSUFFICIENT_DATA
        hits = sum(1 for t in tokens if t in self.lexicon)
        density = hits / len(tokens)
        return TopicLabel.CYBERSECURITY if density >= self.topic_density else TopicLabel.NOT_CYBERSECURITY

    # -- technique mapping ---------------------------------------------------

    def register_mapper(self, slot: MapperSlot, mapper: TechniqueMapper) -> None:
        self._mappers[slot] = mapper
        if not getattr(mapper, "reentrant", True):
            self._mapper_locks[slot] = threading.Lock()

    def map_attack_techniques(
        self, text: str, lang: LanguageResult, mapper: MapperSlot
    ) -> list[TechniqueSuggestion]:
        impl = self._mappers.get(mapper)
        if impl is None:
            raise UnknownMapper(f"no mapper registered for slot {mapper.value!r}")
        if not lang.is_english:
            return []
        lock = self._mapper_locks.get(mapper)
        if lock is not None:
            with lock:
                pairs = impl.map(text)
        else:
            pairs = impl.map(text)
        suggestions = [
            TechniqueSuggestion(technique_id=tid, confidence=conf, mapper=mapper)
            for tid, conf in pairs
        ]
        suggestions.sort(key=lambda s: (-s.confidence, s.technique_id))
        return suggestions

    # -- full enrichment -----------------------------------------------------

    def enrich(self, text: str) -> EnrichmentResult:
        """Language, topic, and technique suggestions with English gating."""
        lang = self.detect_language(text)
        if not lang.is_english:
            return EnrichmentResult(language=lang, topic=TopicLabel.INSUFFICIENT_DATA)
        topic = self.classify_cyber_topic(text, lang)
        techniques: list[TechniqueSuggestion] = []
        for slot in MapperSlot:
            techniques.extend(self.map_attack_techniques(text, lang, slot))
        return EnrichmentResult(language=lang, topic=topic, techniques=tuple(techniques))


_default: Enricher | None = None
_default_lock = threading.Lock()


def default_enricher() -> Enricher:
    global _default
    with _default_lock:
        if _default is None:
            _default = Enricher()
        return _default
