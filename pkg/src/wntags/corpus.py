"""Image records with multi-annotator weighted sense tags and emotion tuples.

Records are immutable snapshots: every mutation builds a fresh record with
its derived weighted tags recomputed, then swaps it into the corpus map.
Readers holding a reference therefore never observe a half-applied change.

Per-synset mean weights are computed in exact rational arithmetic before
being exposed as floats, so the maintained means are independent of the
order ratings arrived in.
"""

from __future__ import annotations

import json
import os
import statistics
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Union

from .errors import (
    DuplicateImageError,
    EmotionOutOfRangeError,
    EmptyCorpusError,
    InsufficientRatersError,
    UnknownImageError,
    UnknownLemmaError,
    WeightOutOfRangeError,
)
from .taxonomy import Sense, Taxonomy

#: Agreement bins for kappa: a rating is absent or falls in thirds of [0, 1].
BIN_ABSENT, BIN_LOW, BIN_MID, BIN_HIGH = 0, 1, 2, 3

#: Kappa below this is reported as inadequate overall agreement.
KAPPA_WARNING_THRESHOLD = 0.4

#: A tag is flagged for re-annotation when its most popular bin holds
#: less than this share of the raters.
MODAL_SHARE_THRESHOLD = 0.5


@dataclass(frozen=True)
class EmotionRating:
    """Dimensional affect tuple; each dimension on the normative [1, 9] scale."""

    valence: float
    arousal: float
    dominance: float

    def __post_init__(self):
        for dim in ("valence", "arousal", "dominance"):
            value = getattr(self, dim)
            if not 1.0 <= value <= 9.0:
                raise EmotionOutOfRangeError(dim, value)


@dataclass(frozen=True)
class TagAssignment:
    """One annotator's weight for one sense on one image."""

    annotator: str
    sense: Sense
    weight: float

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise WeightOutOfRangeError(self.weight)


@dataclass(frozen=True)
class WeightedTag:
    """Cross-annotator average for one tagged synset."""

    sense: Sense
    mean_weight: float
    rater_count: int


def compute_weighted_tags(assignments: Iterable[TagAssignment]) -> tuple[WeightedTag, ...]:
    """Per-synset arithmetic mean of the contributing weights.

    The mean is taken over rationals, so recomputing from scratch always
    reproduces the incrementally maintained value exactly. The tag's
    display lemma is the lexicographically smallest one used by any
    contributor, which keeps the result independent of rating order.
    """
    by_synset: dict[str, list[TagAssignment]] = {}
    for a in assignments:
        by_synset.setdefault(a.sense.synset, []).append(a)
    tags = []
    for synset in sorted(by_synset):
        group = by_synset[synset]
        mean = sum((Fraction(a.weight) for a in group), Fraction(0)) / len(group)
        lemma = min(a.sense.lemma for a in group)
        tags.append(WeightedTag(Sense(synset, lemma), float(mean), len(group)))
    return tuple(tags)


@dataclass(frozen=True)
class ImageRecord:
    """One stored image: locator, legacy keyword, affect tuple, weighted tags.

    The engine stores a locator only and never touches pixel data.
    """

    id: str
    source_ref: str
    iaps_keyword: str
    emotion: EmotionRating
    assignments: tuple[TagAssignment, ...] = ()
    weighted_tags: tuple[WeightedTag, ...] = ()

    @property
    def annotators(self) -> set[str]:
        return {a.annotator for a in self.assignments}

    @property
    def publishable(self) -> bool:
        """At least 3 distinct tagged synsets from at least 2 annotators."""
        return len(self.weighted_tags) >= 3 and len(self.annotators) >= 2


def make_record(
    image_id: str,
    source_ref: str,
    iaps_keyword: str,
    emotion: EmotionRating,
    assignments: Iterable[TagAssignment] = (),
) -> ImageRecord:
    assignments = tuple(assignments)
    return ImageRecord(
        id=image_id,
        source_ref=source_ref,
        iaps_keyword=iaps_keyword,
        emotion=emotion,
        assignments=assignments,
        weighted_tags=compute_weighted_tags(assignments),
    )


class Corpus:
    """Mutable map of image records with a derived keyword vocabulary."""

    def __init__(self, images: Iterable[ImageRecord] = ()):
        self.images: dict[str, ImageRecord] = {}
        for record in images:
            if record.id in self.images:
                raise DuplicateImageError(record.id)
            self.images[record.id] = record

    def __len__(self) -> int:
        return len(self.images)

    def __eq__(self, other) -> bool:
        return isinstance(other, Corpus) and self.images == other.images

    def require(self, image_id: str) -> ImageRecord:
        try:
            return self.images[image_id]
        except KeyError:
            raise UnknownImageError(image_id) from None

    @property
    def keyword_vocabulary(self) -> set[str]:
        return {r.iaps_keyword for r in self.images.values()}

    def records(self, include_drafts: bool = False) -> list[ImageRecord]:
        return [
            r for r in self.images.values()
            if include_drafts or r.publishable
        ]


def add_image(
    c: Corpus,
    image_id: str,
    source_ref: str,
    iaps_keyword: str,
    emotion: EmotionRating,
) -> ImageRecord:
    """Create a draft record with no annotations yet."""
    if image_id in c.images:
        raise DuplicateImageError(image_id)
    record = make_record(image_id, source_ref, iaps_keyword, emotion)
    c.images[image_id] = record
    return record


def annotate(c: Corpus, image_id: str, a: TagAssignment, t: Taxonomy) -> ImageRecord:
    """Record one rating; the same annotator re-rating a synset replaces it."""
    record = c.require(image_id)
    synset = t.require(a.sense.synset)
    if a.sense.lemma not in synset.lemmas:
        raise UnknownLemmaError(a.sense.synset, a.sense.lemma)
    kept = tuple(
        prior for prior in record.assignments
        if not (prior.annotator == a.annotator and prior.sense.synset == a.sense.synset)
    )
    assignments = kept + (a,)
    updated = replace(
        record,
        assignments=assignments,
        weighted_tags=compute_weighted_tags(assignments),
    )
    c.images[image_id] = updated
    return updated


def weight_bin(weight: float) -> int:
    if weight <= 1.0 / 3.0:
        return BIN_LOW
    if weight <= 2.0 / 3.0:
        return BIN_MID
    return BIN_HIGH


@dataclass(frozen=True)
class AgreementReport:
    kappa: float
    flagged: tuple[str, ...]
    low_agreement: bool
    subjects: int
    raters: int


def agreement_kappa(c: Corpus, image_id: str) -> AgreementReport:
    """Fleiss' kappa over the image's tag/annotator rating matrix.

    Subjects are the union of tagged synsets; categories are the four
    weight bins (absent when an annotator skipped the synset). Tags whose
    modal bin holds less than half the raters are flagged for
    re-annotation.
    """
    record = c.require(image_id)
    raters = sorted(record.annotators)
    if len(raters) < 2:
        raise InsufficientRatersError(
            f"image {image_id} has {len(raters)} annotator(s); kappa needs at least 2"
        )
    subjects = sorted({a.sense.synset for a in record.assignments})
    rating = {(a.annotator, a.sense.synset): a.weight for a in record.assignments}

    n = len(raters)
    counts = []
    for synset in subjects:
        row = [0, 0, 0, 0]
        for rater in raters:
            key = (rater, synset)
            row[weight_bin(rating[key]) if key in rating else BIN_ABSENT] += 1
        counts.append(row)

    big_n = len(counts)
    p_i = [(sum(c_ij * c_ij for c_ij in row) - n) / (n * (n - 1)) for row in counts]
    p_bar = sum(p_i) / big_n
    p_j = [sum(row[j] for row in counts) / (big_n * n) for j in range(4)]
    p_e = sum(p * p for p in p_j)
    kappa = 1.0 if 1.0 - p_e == 0.0 else (p_bar - p_e) / (1.0 - p_e)

    flagged = tuple(
        synset for synset, row in zip(subjects, counts)
        if max(row) / n < MODAL_SHARE_THRESHOLD
    )
    return AgreementReport(
        kappa=kappa,
        flagged=flagged,
        low_agreement=kappa < KAPPA_WARNING_THRESHOLD,
        subjects=big_n,
        raters=n,
    )


@dataclass(frozen=True)
class TagCountStats:
    median: float
    mean: float
    sd: float
    min: int
    max: int
    n_images: int


def tag_count_stats(c: Corpus, include_drafts: bool = False) -> TagCountStats:
    """Distribution of distinct-tag counts across publishable images.

    Sample standard deviation (n-1 denominator); 0.0 for a single image.
    """
    counts = [len(r.weighted_tags) for r in c.records(include_drafts)]
    if not counts:
        raise EmptyCorpusError("no publishable images to aggregate")
    return TagCountStats(
        median=float(statistics.median(counts)),
        mean=statistics.mean(counts),
        sd=statistics.stdev(counts) if len(counts) > 1 else 0.0,
        min=min(counts),
        max=max(counts),
        n_images=len(counts),
    )


# -- persistence (JSON Lines, derived fields never stored) -------------------

def record_to_dict(record: ImageRecord) -> dict:
    return {
        "id": record.id,
        "source_ref": record.source_ref,
        "iaps_keyword": record.iaps_keyword,
        "emotion": {
            "val": record.emotion.valence,
            "ar": record.emotion.arousal,
            "dom": record.emotion.dominance,
        },
        "assignments": [
            {
                "annotator": a.annotator,
                "synset": a.sense.synset,
                "lemma": a.sense.lemma,
                "weight": a.weight,
            }
            for a in record.assignments
        ],
    }


def record_from_dict(data: dict) -> ImageRecord:
    emotion = EmotionRating(
        valence=float(data["emotion"]["val"]),
        arousal=float(data["emotion"]["ar"]),
        dominance=float(data["emotion"]["dom"]),
    )
    assignments = tuple(
        TagAssignment(
            annotator=str(a["annotator"]),
            sense=Sense(str(a["synset"]), str(a["lemma"])),
            weight=float(a["weight"]),
        )
        for a in data.get("assignments", ())
    )
    return make_record(str(data["id"]), str(data["source_ref"]),
                       str(data["iaps_keyword"]), emotion, assignments)


def save_corpus(c: Corpus, path: Union[str, Path]) -> None:
    """Write canonical JSONL: one image per line, sorted by id."""
    with Path(path).open("w", encoding="utf-8") as f:
        for image_id in sorted(c.images):
            f.write(json.dumps(record_to_dict(c.images[image_id]),
                               ensure_ascii=False, sort_keys=True) + "\n")


def load_corpus(path: Union[str, Path]) -> Corpus:
    """Read JSONL; a repeated image id replaces the earlier line (last wins),
    which is what the service's append-style durable writes produce."""
    corpus = Corpus()
    with Path(path).open("r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            record = record_from_dict(json.loads(line))
            corpus.images[record.id] = record
    return corpus


def append_record(path: Union[str, Path], record: ImageRecord) -> None:
    """Durably append one record snapshot; fsynced before returning."""
    with Path(path).open("a", encoding="utf-8") as f:
        f.write(json.dumps(record_to_dict(record), ensure_ascii=False, sort_keys=True) + "\n")
        f.flush()
        os.fsync(f.fileno())


def validate_corpus(c: Corpus, taxonomy) -> None:
    """Check every assignment against the taxonomy; raises on the first hole."""
    for image_id in sorted(c.images):
        for a in c.images[image_id].assignments:
            syn = taxonomy.require(a.sense.synset)
            if a.sense.lemma not in syn.lemmas:
                raise UnknownLemmaError(syn.id, a.sense.lemma)
