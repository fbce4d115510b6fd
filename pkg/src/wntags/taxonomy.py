"""Lexical taxonomy graph: synsets, relations, lemma lookup, node distance.

The taxonomy is loaded from a line-oriented text format (one synset per
line, tab-separated fields) and is immutable afterwards, so any number of
readers may share one instance. Node distance is the shortest-path hop
count over the four relation types, traversed undirected; every edge
counts as one hop regardless of type.
"""

from __future__ import annotations

import hashlib
import io
import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TextIO, Union

from .errors import (
    AsymmetricEdgeError,
    DanglingEdgeError,
    DuplicateSynsetError,
    TaxonomySyntaxError,
    UnknownSynsetError,
)

SYNSET_ID_RE = re.compile(r"^[nvar]-[0-9]+$")

POS_BY_LETTER = {"n": "noun", "v": "verb", "a": "adjective", "r": "adverb"}
LETTER_BY_POS = {v: k for k, v in POS_BY_LETTER.items()}

RELATION_CODES = {"hyp": "hypernym", "hpo": "hyponym", "hol": "holonym", "mer": "meronym"}
CODE_BY_RELATION = {v: k for k, v in RELATION_CODES.items()}

INVERSE_RELATION = {
    "hypernym": "hyponym",
    "hyponym": "hypernym",
    "holonym": "meronym",
    "meronym": "holonym",
}

#: Returned by :func:`node_distance` when no path exists within the cutoff.
UNREACHABLE = None


@dataclass(frozen=True)
class Sense:
    """One word's membership in one synset."""

    synset: str
    lemma: str


@dataclass(frozen=True)
class Synset:
    """A concept node: id, part of speech, synonymous lemmas, typed edges."""

    id: str
    pos: str
    lemmas: tuple[str, ...]
    relations: tuple[tuple[str, str], ...]
    gloss: str = ""


class Taxonomy:
    """Immutable synset graph with a lemma index and undirected adjacency.

    Construction validates referential integrity (no dangling edges) and
    relation symmetry (hypernym/hyponym and holonym/meronym must occur in
    inverse pairs).
    """

    def __init__(self, synsets: Iterable[Synset]):
        self.synsets: dict[str, Synset] = {}
        for syn in synsets:
            if syn.id in self.synsets:
                raise DuplicateSynsetError(syn.id)
            self.synsets[syn.id] = syn

        for syn in self.synsets.values():
            for rel, target in syn.relations:
                if target not in self.synsets:
                    raise DanglingEdgeError(syn.id, target)
                inverse = (INVERSE_RELATION[rel], syn.id)
                if inverse not in self.synsets[target].relations:
                    raise AsymmetricEdgeError(syn.id, target, rel)

        self.lemma_index: dict[str, set[str]] = {}
        for syn in self.synsets.values():
            for lemma in syn.lemmas:
                self.lemma_index.setdefault(lemma, set()).add(syn.id)

        # Symmetry makes outgoing targets the full undirected neighbor set.
        self._adjacency: dict[str, tuple[str, ...]] = {}
        for syn in self.synsets.values():
            seen: dict[str, None] = {}
            for _rel, target in syn.relations:
                seen.setdefault(target)
            self._adjacency[syn.id] = tuple(seen)

    def __len__(self) -> int:
        return len(self.synsets)

    def __contains__(self, synset_id: str) -> bool:
        return synset_id in self.synsets

    def require(self, synset_id: str) -> Synset:
        try:
            return self.synsets[synset_id]
        except KeyError:
            raise UnknownSynsetError(synset_id) from None

    def neighbors(self, synset_id: str) -> tuple[str, ...]:
        self.require(synset_id)
        return self._adjacency[synset_id]

    def digest(self) -> str:
        """SHA-256 over the canonical dump; used to detect stale sim tables."""
        h = hashlib.sha256()
        for syn_id in sorted(self.synsets):
            syn = self.synsets[syn_id]
            rels = ";".join(f"{r}:{t}" for r, t in sorted(syn.relations))
            h.update(f"{syn.id}\t{syn.pos}\t{'|'.join(syn.lemmas)}\t{rels}\t{syn.gloss}\n".encode())
        return h.hexdigest()


def _parse_line(line_no: int, line: str) -> Synset:
    fields = line.split("\t")
    if len(fields) != 5:
        raise TaxonomySyntaxError(line_no, f"expected 5 tab-separated fields, got {len(fields)}")
    syn_id, pos_letter, lemma_field, rel_field, gloss = fields

    if not SYNSET_ID_RE.match(syn_id):
        raise TaxonomySyntaxError(line_no, f"bad synset id {syn_id!r}")
    if pos_letter not in POS_BY_LETTER:
        raise TaxonomySyntaxError(line_no, f"bad part-of-speech letter {pos_letter!r}")

    if lemma_field == "-" or not lemma_field:
        raise TaxonomySyntaxError(line_no, "synset needs at least one lemma")
    lemmas = lemma_field.split("|")
    seen_lemmas = set()
    for lemma in lemmas:
        if not lemma or lemma != lemma.lower() or any(c.isspace() for c in lemma):
            raise TaxonomySyntaxError(line_no, f"bad lemma {lemma!r}")
        if lemma in seen_lemmas:
            raise TaxonomySyntaxError(line_no, f"duplicate lemma {lemma!r}")
        seen_lemmas.add(lemma)

    relations: list[tuple[str, str]] = []
    if rel_field != "-" and rel_field:
        for item in rel_field.split(";"):
            code, sep, target = item.partition(":")
            if not sep or code not in RELATION_CODES:
                raise TaxonomySyntaxError(line_no, f"bad relation {item!r}")
            if not SYNSET_ID_RE.match(target):
                raise TaxonomySyntaxError(line_no, f"bad relation target {target!r}")
            if target == syn_id:
                raise TaxonomySyntaxError(line_no, "relation points at its own synset")
            rel = (RELATION_CODES[code], target)
            if rel in relations:
                raise TaxonomySyntaxError(line_no, f"duplicate relation {item!r}")
            relations.append(rel)

    gloss_text = "" if gloss == "-" else gloss
    return Synset(syn_id, POS_BY_LETTER[pos_letter], tuple(lemmas), tuple(relations), gloss_text)


def load_taxonomy(source: Union[str, Path, TextIO]) -> Taxonomy:
    """Read the taxonomy file format from a path or an open text stream."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text(encoding="utf-8")
    synsets = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        synsets.append(_parse_line(line_no, line))
    return Taxonomy(synsets)


def dump_taxonomy(t: Taxonomy) -> str:
    """Serialize back to the file format; load(dump(t)) reproduces t."""
    out = io.StringIO()
    for syn in t.synsets.values():
        rels = ";".join(f"{CODE_BY_RELATION[r]}:{tgt}" for r, tgt in syn.relations) or "-"
        gloss = syn.gloss.replace("\t", " ").replace("\n", " ") or "-"
        out.write(f"{syn.id}\t{LETTER_BY_POS[syn.pos]}\t{'|'.join(syn.lemmas)}\t{rels}\t{gloss}\n")
    return out.getvalue()


def save_taxonomy(t: Taxonomy, path: Union[str, Path]) -> None:
    Path(path).write_text(dump_taxonomy(t), encoding="utf-8")


def lookup_lemma(t: Taxonomy, lemma: str) -> set[str]:
    """Synset ids carrying the lemma; empty set on a miss."""
    return set(t.lemma_index.get(lemma, ()))


def node_distance(t: Taxonomy, a: str, b: str, d_max: int):
    """Shortest-path hops between two synsets, or UNREACHABLE beyond d_max.

    Breadth-first search from ``a`` with early cutoff: the frontier stops
    expanding once its depth reaches ``d_max``.
    """
    t.require(a)
    t.require(b)
    if a == b:
        return 0
    if d_max <= 0:
        return UNREACHABLE
    visited = {a}
    frontier = [a]
    depth = 0
    while frontier and depth < d_max:
        depth += 1
        next_frontier = []
        for node in frontier:
            for neighbor in t._adjacency[node]:
                if neighbor in visited:
                    continue
                if neighbor == b:
                    return depth
                visited.add(neighbor)
                next_frontier.append(neighbor)
        frontier = next_frontier
    return UNREACHABLE


def neighborhood(t: Taxonomy, s: str, d: int) -> set[str]:
    """All synsets within node distance ``d`` of ``s``, including ``s``."""
    t.require(s)
    result = {s}
    frontier = deque([(s, 0)])
    while frontier:
        node, depth = frontier.popleft()
        if depth == d:
            continue
        for neighbor in t._adjacency[node]:
            if neighbor not in result:
                result.add(neighbor)
                frontier.append((neighbor, depth + 1))
    return result
