"""Batch retrieval evaluation: precision-at-rank, TP counts, curve output.

Replays the single-concept query protocol at desk scale: a batch of
queries runs against the corpus, each ranking is scored against relevance
judgments, and per-rank averages are emitted as CSV plus a rendered
figure. A seeded synthetic generator stands in for licensed image sets;
its ground truth is a distance rule (an image is relevant when some query
synset lies within a fixed radius of some tag synset).
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Union

from .corpus import Corpus, EmotionRating, ImageRecord, TagAssignment, make_record
from .errors import (
    EmptyReportError,
    FormatError,
    InvalidParamsError,
    NotEnoughCandidatesError,
    WntagsError,
)
from .relatedness import SimilarityTable
from .retrieval import (
    DEFAULT_D_MAX,
    DirectSimilarity,
    SimFn,
    TableSimilarity,
    parse_query,
    search,
)
from .taxonomy import Sense, Synset, Taxonomy


class Judgments:
    """Relevance ground truth, at most one verdict per (query, image)."""

    def __init__(self):
        self._by_query: dict[str, dict[str, bool]] = {}

    def set(self, query_id: str, image_id: str, relevant: bool) -> None:
        self._by_query.setdefault(query_id, {})[image_id] = relevant

    def get(self, query_id: str, image_id: str) -> Optional[bool]:
        return self._by_query.get(query_id, {}).get(image_id)

    def for_query(self, query_id: str) -> dict[str, bool]:
        return dict(self._by_query.get(query_id, {}))

    def __len__(self) -> int:
        return sum(len(v) for v in self._by_query.values())

    def __eq__(self, other) -> bool:
        return isinstance(other, Judgments) and self._by_query == other._by_query


def save_judgments(judgments: Judgments, path: Union[str, Path]) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["query_id", "image_id", "relevant"])
        for query_id in sorted(judgments._by_query):
            for image_id in sorted(judgments._by_query[query_id]):
                writer.writerow([query_id, image_id,
                                 int(judgments._by_query[query_id][image_id])])


def load_judgments(path: Union[str, Path]) -> Judgments:
    judgments = Judgments()
    with Path(path).open("r", encoding="utf-8", newline="") as f:
        for line_no, row in enumerate(csv.reader(f), start=1):
            if not row:
                continue
            if line_no == 1 and row == ["query_id", "image_id", "relevant"]:
                continue
            if len(row) != 3:
                raise FormatError(line_no, f"expected 3 columns, got {len(row)}")
            query_id, image_id, raw = row
            if raw not in ("0", "1"):
                raise FormatError(line_no, f"relevant must be 0 or 1, got {raw!r}")
            if judgments.get(query_id, image_id) is not None:
                raise FormatError(line_no, f"duplicate judgment for ({query_id}, {image_id})")
            judgments.set(query_id, image_id, raw == "1")
    return judgments


@dataclass(frozen=True)
class PrecisionTp:
    precision_at_k: tuple[float, ...]
    tp_at_k: tuple[int, ...]
    tp_count: int
    unjudged: tuple[str, ...]


def precision_tp(result_ids: list[str], judgments: Mapping[str, bool]) -> PrecisionTp:
    """Precision and cumulative true positives at every result rank.

    An id with no judgment counts as not relevant and is reported back so
    the caller can warn about incomplete ground truth.
    """
    precision = []
    tp_at_k = []
    unjudged = []
    hits = 0
    for k, image_id in enumerate(result_ids, start=1):
        verdict = judgments.get(image_id)
        if verdict is None:
            unjudged.append(image_id)
        elif verdict:
            hits += 1
        tp_at_k.append(hits)
        precision.append(hits / k)
    return PrecisionTp(tuple(precision), tuple(tp_at_k), hits, tuple(unjudged))


@dataclass(frozen=True)
class QueryEval:
    query: str
    result_ids: tuple[str, ...]
    precision_at_k: tuple[float, ...]
    tp_at_k: tuple[int, ...]
    tp_count: int
    unjudged: tuple[str, ...]

    @property
    def avg_precision(self) -> float:
        if not self.precision_at_k:
            return 0.0
        return sum(self.precision_at_k) / len(self.precision_at_k)


@dataclass(frozen=True)
class Aggregate:
    avg_precision: float
    avg_tp: float
    precision_at_rank: tuple[float, ...]
    tp_at_rank: tuple[float, ...]
    tp_normalized_at_rank: tuple[float, ...]
    max_tp: int


@dataclass(frozen=True)
class EvalReport:
    per_query: tuple[QueryEval, ...]
    failures: tuple[tuple[str, str, str], ...]
    aggregate: Aggregate


@dataclass
class BatchParams:
    taxonomy: Taxonomy
    d_max: int = DEFAULT_D_MAX
    limit: Optional[int] = None
    include_drafts: bool = False
    table: Optional[SimilarityTable] = None

    def sim_source(self) -> SimFn:
        if self.table is not None:
            return TableSimilarity(self.table, self.taxonomy, self.d_max)
        return DirectSimilarity(self.taxonomy, self.d_max)


def _aggregate(evals: list[QueryEval]) -> Aggregate:
    if not evals:
        return Aggregate(0.0, 0.0, (), (), (), 0)
    max_len = max(len(e.result_ids) for e in evals)
    max_tp = max(e.tp_count for e in evals)
    precision_rows = []
    tp_rows = []
    tp_norm_rows = []
    for k in range(1, max_len + 1):
        # A rank row averages over the queries that returned at least k results.
        at_k = [e for e in evals if len(e.result_ids) >= k]
        precision_rows.append(sum(e.precision_at_k[k - 1] for e in at_k) / len(at_k))
        tp_rows.append(sum(e.tp_at_k[k - 1] for e in at_k) / len(at_k))
        if max_tp > 0:
            tp_norm_rows.append(sum(e.tp_at_k[k - 1] / max_tp for e in at_k) / len(at_k))
        else:
            tp_norm_rows.append(0.0)
    return Aggregate(
        avg_precision=sum(e.avg_precision for e in evals) / len(evals),
        avg_tp=sum(e.tp_count for e in evals) / len(evals),
        precision_at_rank=tuple(precision_rows),
        tp_at_rank=tuple(tp_rows),
        tp_normalized_at_rank=tuple(tp_norm_rows),
        max_tp=max_tp,
    )


def run_batch(
    c: Corpus,
    queries: list[str],
    judgments: Judgments,
    params: BatchParams,
) -> EvalReport:
    """Search once per query and fold the metrics into one report.

    A query that fails to parse is listed under failures and excluded
    from the aggregate; the rest of the batch still runs.
    """
    if not queries:
        raise InvalidParamsError("query list is empty")
    simfn = params.sim_source()
    evals: list[QueryEval] = []
    failures: list[tuple[str, str, str]] = []
    for query_text in queries:
        try:
            q = parse_query(params.taxonomy, query_text, d_max=params.d_max)
            results = search(c, q, simfn, limit=params.limit,
                             include_drafts=params.include_drafts)
        except WntagsError as exc:
            failures.append((query_text, exc.code, str(exc)))
            continue
        ids = [r.image_id for r in results]
        metrics = precision_tp(ids, judgments.for_query(query_text))
        evals.append(QueryEval(
            query=query_text,
            result_ids=tuple(ids),
            precision_at_k=metrics.precision_at_k,
            tp_at_k=metrics.tp_at_k,
            tp_count=metrics.tp_count,
            unjudged=metrics.unjudged,
        ))
    return EvalReport(tuple(evals), tuple(failures), _aggregate(evals))


def _within_radius(t: Taxonomy, sources: Iterable[str], radius: int) -> set[str]:
    """Multi-source BFS: every synset within the radius of any source."""
    reached = set()
    frontier = []
    for s in sorted(set(sources)):
        t.require(s)
        reached.add(s)
        frontier.append(s)
    depth = 0
    while frontier and depth < radius:
        depth += 1
        next_frontier = []
        for node in frontier:
            for neighbor in t.neighbors(node):
                if neighbor not in reached:
                    reached.add(neighbor)
                    next_frontier.append(neighbor)
        frontier = next_frontier
    return reached


def select_query_terms(
    t: Taxonomy,
    c: Corpus,
    n: int,
    d: int,
    seed: int,
    include_drafts: bool = False,
) -> list[str]:
    """Draw n query lemmas near the corpus, reproducibly for a fixed seed.

    Candidates are all lemmas of synsets lying within node distance d of
    the nearest tagged synset; d = 0 restricts to the tags themselves.
    """
    if n < 1:
        raise InvalidParamsError(f"n must be >= 1, got {n}")
    tag_synsets = {
        tag.sense.synset
        for record in c.records(include_drafts)
        for tag in record.weighted_tags
    }
    if not tag_synsets:
        raise NotEnoughCandidatesError("corpus has no tagged synsets")
    nearby = _within_radius(t, tag_synsets, d)
    candidates = sorted({lemma for sid in nearby for lemma in t.synsets[sid].lemmas})
    if len(candidates) < n:
        raise NotEnoughCandidatesError(
            f"only {len(candidates)} candidate lemmas within d={d}, need {n}"
        )
    return random.Random(seed).sample(candidates, n)


@dataclass(frozen=True)
class DistanceJudge:
    """Rule ground truth: relevant iff some query synset is within the
    radius of some tag synset of the image."""

    taxonomy: Taxonomy
    radius: int

    def relevant(self, query_synsets: Iterable[str], record: ImageRecord) -> bool:
        near = _within_radius(self.taxonomy, query_synsets, self.radius)
        return any(tag.sense.synset in near for tag in record.weighted_tags)

    def judgments_for(self, queries: list[str], c: Corpus,
                      include_drafts: bool = False) -> Judgments:
        """Materialize a verdict for every (query, image) pair."""
        judgments = Judgments()
        for query_text in queries:
            q = parse_query(self.taxonomy, query_text)
            near = _within_radius(self.taxonomy, q.synsets, self.radius)
            for record in c.records(include_drafts):
                hit = any(tag.sense.synset in near for tag in record.weighted_tags)
                judgments.set(query_text, record.id, hit)
        return judgments


@dataclass(frozen=True)
class SyntheticParams:
    n_synsets: int
    n_images: int
    seed: int = 0
    tag_median: int = 20
    tag_sd: float = 2.8
    tag_min: int = 13
    tag_max: int = 28
    annotator_pool: int = 5
    min_raters: int = 2
    max_raters: int = 3
    relevance_radius: int = 3
    cross_edge_every: int = 11
    synonym_every: int = 13
    polysemy_every: int = 29

    def validate(self) -> None:
        if self.n_synsets < 2 or self.n_images < 1:
            raise InvalidParamsError("need at least 2 synsets and 1 image")
        if not (0 < self.tag_min <= self.tag_median <= self.tag_max):
            raise InvalidParamsError("need 0 < tag_min <= tag_median <= tag_max")
        if self.n_synsets < self.tag_max:
            raise InvalidParamsError("n_synsets must cover tag_max distinct tags")
        if not (2 <= self.min_raters <= self.max_raters <= self.annotator_pool):
            raise InvalidParamsError("need 2 <= min_raters <= max_raters <= annotator_pool")
        if self.relevance_radius < 0:
            raise InvalidParamsError("relevance_radius must be >= 0")


def _tag_counts(rng: random.Random, p: SyntheticParams) -> list[int]:
    # Symmetric draws around the median plus pinned order statistics give
    # the exact target median, min and max for any n >= 3.
    n = p.n_images
    if n == 1:
        return [p.tag_median]
    if n == 2:
        return [p.tag_min, p.tag_max]
    m = 1 if (n - 2) % 2 == 1 else 2
    k = (n - 2 - m) // 2
    counts = [p.tag_min, p.tag_max] + [p.tag_median] * m
    for _ in range(k):
        delta = abs(rng.gauss(0.0, p.tag_sd))
        counts.append(max(p.tag_min, min(p.tag_median, round(p.tag_median - delta))))
        counts.append(min(p.tag_max, max(p.tag_median, round(p.tag_median + delta))))
    rng.shuffle(counts)
    return counts


def _synthetic_taxonomy(rng: random.Random, p: SyntheticParams) -> Taxonomy:
    parents = {i: rng.randint(1, i - 1) for i in range(2, p.n_synsets + 1)}
    relations: dict[int, list[tuple[str, str]]] = {i: [] for i in range(1, p.n_synsets + 1)}
    for child, parent in parents.items():
        relations[child].append(("hypernym", f"n-{parent}"))
        relations[parent].append(("hyponym", f"n-{child}"))
    linked = {tuple(sorted((c, par))) for c, par in parents.items()}
    if p.cross_edge_every:
        for i in range(3, p.n_synsets + 1, p.cross_edge_every):
            partner = rng.randint(1, i - 1)
            key = tuple(sorted((i, partner)))
            if partner == i or key in linked:
                continue
            linked.add(key)
            relations[i].append(("holonym", f"n-{partner}"))
            relations[partner].append(("meronym", f"n-{i}"))

    synsets = []
    for i in range(1, p.n_synsets + 1):
        lemmas = [f"t{i:04d}"]
        if p.synonym_every and i % p.synonym_every == 0:
            lemmas.append(f"t{i:04d}b")
        if p.polysemy_every and i > 1 and i % p.polysemy_every == 0:
            lemmas.append(f"t{i - 1:04d}")
        synsets.append(Synset(f"n-{i}", "noun", tuple(lemmas), tuple(relations[i])))
    return Taxonomy(synsets)


def generate_synthetic(p: SyntheticParams) -> tuple[Taxonomy, Corpus, DistanceJudge]:
    """Seeded taxonomy + corpus with rule-based ground truth attached."""
    p.validate()
    rng = random.Random(p.seed)
    taxonomy = _synthetic_taxonomy(rng, p)
    all_ids = sorted(taxonomy.synsets)
    annotators = [f"a{j:02d}" for j in range(p.annotator_pool)]
    keywords = [f"kw{j:02d}" for j in range(17)]

    corpus = Corpus()
    counts = _tag_counts(rng, p)
    for idx in range(p.n_images):
        image_id = f"img{idx:04d}"
        tag_ids = rng.sample(all_ids, counts[idx])
        raters = rng.sample(annotators, rng.randint(p.min_raters, p.max_raters))
        emotion = EmotionRating(
            valence=round(rng.uniform(1.0, 9.0), 2),
            arousal=round(rng.uniform(1.0, 9.0), 2),
            dominance=round(rng.uniform(1.0, 9.0), 2),
        )
        assignments = []
        for sid in sorted(tag_ids):
            lemma = taxonomy.synsets[sid].lemmas[0]
            for rater in raters:
                assignments.append(TagAssignment(
                    rater, Sense(sid, lemma), round(rng.uniform(0.0, 1.0), 2)
                ))
        corpus.images[image_id] = make_record(
            image_id, f"assets/{image_id}.jpg", keywords[idx % len(keywords)],
            emotion, assignments,
        )
    return taxonomy, corpus, DistanceJudge(taxonomy, p.relevance_radius)


# -- curve output -------------------------------------------------------------

CURVE_COLUMNS = ["rank", "avg_precision", "avg_tp_normalized", "avg_tp"]


def emit_curves(report: EvalReport, path: Union[str, Path]) -> int:
    """Write the per-rank averages as CSV; returns the number of data rows."""
    if not report.per_query:
        raise EmptyReportError("report contains no evaluated queries")
    agg = report.aggregate
    if not agg.precision_at_rank:
        raise EmptyReportError("no ranked results to tabulate")
    with Path(path).open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CURVE_COLUMNS)
        for i, rank in enumerate(range(1, len(agg.precision_at_rank) + 1)):
            writer.writerow([
                rank,
                repr(agg.precision_at_rank[i]),
                repr(agg.tp_normalized_at_rank[i]),
                repr(agg.tp_at_rank[i]),
            ])
    return len(agg.precision_at_rank)


def render_curves(report: EvalReport, path: Union[str, Path]) -> None:
    """Render the two per-rank curves to an image file."""
    if not report.per_query or not report.aggregate.precision_at_rank:
        raise EmptyReportError("nothing to plot")
    from matplotlib.figure import Figure

    agg = report.aggregate
    ranks = list(range(1, len(agg.precision_at_rank) + 1))
    fig = Figure(figsize=(6.4, 4.0))
    ax = fig.add_subplot(111)
    ax.plot(ranks, agg.precision_at_rank, linestyle=":", marker="o",
            markersize=3, label="mean precision")
    ax.plot(ranks, agg.tp_normalized_at_rank, linestyle="-", marker="s",
            markersize=3, label="mean TP (normalized)")
    ax.set_xlabel("result rank")
    ax.set_ylabel("value")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
