"""Query parsing, the weighted relatedness goal function, and ranked search.

A free-text query is segmented into taxonomy senses by greedy
longest-match-first collocation lookup. Every stored image is then scored
by summing, over each query synset and each of the image's weighted tags,
the tag's mean weight times the relatedness of the two synsets. Results
are ranked by normalized relevance, ties broken by image id.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Callable, Optional

from .corpus import Corpus, ImageRecord
from .errors import EmptyQueryError, InvalidParamsError, InvalidRangeError, NoSenseFoundError
from .numfmt import sig12
from .relatedness import SimilarityTable, table_lookup, verify_table
from .taxonomy import Taxonomy, lookup_lemma

DEFAULT_D_MAX = 10
MAX_COLLOCATION_TOKENS = 4

#: Pass to ``limit`` to return the full ranking.
ALL = None

TOKEN_RE = re.compile(r"[a-z0-9]+")

SimFn = Callable[[str, str], float]


class DirectSimilarity:
    """On-the-fly relatedness; one cached breadth-first sweep per source."""

    def __init__(self, t: Taxonomy, d_max: int):
        self.taxonomy = t
        self.d_max = d_max
        self._distances: dict[str, dict[str, int]] = {}

    def _sweep(self, source: str) -> dict[str, int]:
        cached = self._distances.get(source)
        if cached is not None:
            return cached
        self.taxonomy.require(source)
        distances = {source: 0}
        frontier = [source]
        depth = 0
        while frontier and depth < self.d_max:
            depth += 1
            next_frontier = []
            for node in frontier:
                for neighbor in self.taxonomy.neighbors(node):
                    if neighbor not in distances:
                        distances[neighbor] = depth
                        next_frontier.append(neighbor)
            frontier = next_frontier
        self._distances[source] = distances
        return distances

    def __call__(self, a: str, b: str) -> float:
        self.taxonomy.require(b)
        d = self._sweep(a).get(b)
        if d is None:
            return 0.0
        return sig12(1.0 / (1.0 + d))


class TableSimilarity:
    """Relatedness served from a precomputed table, digest-checked on attach.

    An optional query-time cutoff below the table's build cutoff is applied
    by thresholding on the stored value, which is monotone in distance.
    """

    def __init__(self, tab: SimilarityTable, t: Taxonomy, d_max: Optional[int] = None):
        verify_table(tab, t)
        self.table = tab
        self.d_max = tab.d_max if d_max is None else min(d_max, tab.d_max)
        self._floor = sig12(1.0 / (1.0 + self.d_max)) if self.d_max < tab.d_max else 0.0

    def __call__(self, a: str, b: str) -> float:
        value = table_lookup(self.table, a, b)
        if self._floor and value < self._floor:
            return 0.0
        return value


@dataclass(frozen=True)
class MatchedSpan:
    """A contiguous token range resolved to one lemma's synsets."""

    start: int
    end: int
    lemma: str
    synsets: frozenset[str]


@dataclass(frozen=True)
class Query:
    raw_text: str
    matched_spans: tuple[MatchedSpan, ...]
    unmatched_tokens: tuple[str, ...]
    d_max: int = DEFAULT_D_MAX

    @property
    def synsets(self) -> frozenset[str]:
        out: set[str] = set()
        for span in self.matched_spans:
            out.update(span.synsets)
        return frozenset(out)


def parse_query(t: Taxonomy, text: str, d_max: int = DEFAULT_D_MAX) -> Query:
    """Segment the query into senses, longest collocations first.

    Candidate collocations are contiguous, order-preserving n-grams of up
    to four tokens joined by underscores. Longer matches win; ties go to
    the leftmost span; spans never overlap. Tokens left uncovered are
    reported, and a query with no match at all is an error.
    """
    if not text.strip():
        raise EmptyQueryError("query is empty")
    tokens = TOKEN_RE.findall(text.lower())
    if not tokens:
        raise EmptyQueryError(f"no searchable tokens in {text!r}")

    covered = [False] * len(tokens)
    spans: list[MatchedSpan] = []
    for n in range(min(MAX_COLLOCATION_TOKENS, len(tokens)), 0, -1):
        for start in range(0, len(tokens) - n + 1):
            end = start + n
            if any(covered[start:end]):
                continue
            lemma = "_".join(tokens[start:end])
            ids = lookup_lemma(t, lemma)
            if ids:
                spans.append(MatchedSpan(start, end, lemma, frozenset(ids)))
                for i in range(start, end):
                    covered[i] = True

    spans.sort(key=lambda s: s.start)
    unmatched = tuple(tok for i, tok in enumerate(tokens) if not covered[i])
    if not spans:
        raise NoSenseFoundError(list(unmatched))
    return Query(raw_text=text, matched_spans=tuple(spans),
                 unmatched_tokens=unmatched, d_max=d_max)


@dataclass(frozen=True)
class Contribution:
    query_synset: str
    image_synset: str
    mean_weight: float
    sim: float
    term: float


@dataclass(frozen=True)
class RankedResult:
    image_id: str
    raw_score: float
    relevance: float
    contributions: tuple[Contribution, ...]


def score_image(q: Query, img: ImageRecord, simfn: SimFn) -> RankedResult:
    """Weighted relatedness of the image's tags to the query senses.

    raw_score sums mean_weight * sim over every (query synset, tag) pair;
    relevance divides by the number of query synsets times the image's
    total tag mass, which bounds it to [0, 1].
    """
    query_synsets = sorted(q.synsets)
    raw = 0.0
    contributions = []
    for qs in query_synsets:
        for tag in img.weighted_tags:
            s = simfn(qs, tag.sense.synset)
            term = tag.mean_weight * s
            raw += term
            if s > 0.0:
                contributions.append(
                    Contribution(qs, tag.sense.synset, tag.mean_weight, s, term)
                )
    mass = sum(tag.mean_weight for tag in img.weighted_tags)
    denom = len(query_synsets) * mass
    relevance = raw / denom if denom > 0.0 else 0.0
    return RankedResult(img.id, raw, relevance, tuple(contributions))


def search(
    c: Corpus,
    q: Query,
    simfn: SimFn,
    limit: Optional[int] = ALL,
    include_drafts: bool = False,
) -> list[RankedResult]:
    """Score every image exhaustively; rank by relevance, ties by image id."""
    results = []
    for image_id in sorted(c.images):
        img = c.images[image_id]
        if not (img.publishable or include_drafts):
            continue
        scored = score_image(q, img, simfn)
        if scored.raw_score > 0.0:
            results.append(scored)
    results.sort(key=lambda r: (-r.relevance, r.image_id))
    if limit is not None:
        results = results[:limit]
    return results


def adaptive_search(
    c: Corpus,
    q: Query,
    source_for_d: Callable[[int], SimFn],
    d_start: int,
    d_step: int,
    min_results: int,
    d_ceiling: int,
    limit: Optional[int] = ALL,
    include_drafts: bool = False,
) -> tuple[list[RankedResult], int]:
    """Widen the neighborhood stepwise until enough results come back.

    Runs search at d_start, d_start + d_step, ... (capped at d_ceiling)
    and stops as soon as the result count reaches min_results or the
    ceiling has been searched. Returns the last run plus the cutoff used.
    """
    if d_start > d_ceiling:
        raise InvalidParamsError(f"d_start {d_start} exceeds d_ceiling {d_ceiling}")
    if d_step < 1:
        raise InvalidParamsError(f"d_step must be >= 1, got {d_step}")
    if min_results < 1:
        raise InvalidParamsError(f"min_results must be >= 1, got {min_results}")
    d = d_start
    while True:
        d_used = min(d, d_ceiling)
        results = search(c, replace(q, d_max=d_used), source_for_d(d_used),
                         limit=limit, include_drafts=include_drafts)
        if len(results) >= min_results or d_used >= d_ceiling:
            return results, d_used
        d += d_step


def _check_range(name: str, bounds: Optional[tuple[float, float]]):
    if bounds is None:
        return
    lo, hi = bounds
    if lo > hi or lo < 1.0 or hi > 9.0:
        raise InvalidRangeError(f"{name} range [{lo}, {hi}] invalid (need 1 <= lo <= hi <= 9)")


def filter_affect(
    results: list[RankedResult],
    c: Corpus,
    val_range: Optional[tuple[float, float]] = None,
    ar_range: Optional[tuple[float, float]] = None,
    dom_range: Optional[tuple[float, float]] = None,
) -> list[RankedResult]:
    """Keep results whose emotion lies inside every supplied closed range."""
    _check_range("valence", val_range)
    _check_range("arousal", ar_range)
    _check_range("dominance", dom_range)

    def passes(record: ImageRecord) -> bool:
        emo = record.emotion
        for bounds, value in ((val_range, emo.valence), (ar_range, emo.arousal),
                              (dom_range, emo.dominance)):
            if bounds is not None and not bounds[0] <= value <= bounds[1]:
                return False
        return True

    return [r for r in results if passes(c.require(r.image_id))]


def search_by_keyword(c: Corpus, keyword: str) -> list[str]:
    """Legacy retrieval dimension: exact, case-insensitive keyword match."""
    needle = keyword.lower()
    return sorted(
        image_id for image_id, record in c.images.items()
        if record.iaps_keyword.lower() == needle
    )
