"""Path-based semantic relatedness and the precomputed all-pairs table.

Relatedness between two synsets is 1/(1 + node_distance), quantized to 12
significant digits, and 0 once the distance exceeds the cutoff. The value
is quantized at the source so that on-the-fly computation, the in-memory
table, and the table file all carry bit-identical numbers.

The module boundary is a plain ``sim(taxonomy, a, b, d_max)`` function so
a different relatedness measure can be slotted in behind the same table
machinery later.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .errors import BuildFailureError, FormatError, StaleTableError
from .numfmt import fmt12, sig12
from .taxonomy import SYNSET_ID_RE, Taxonomy, node_distance

_HEADER_RE = re.compile(r"^#wntags-sim v1 d_max=(\d+) digest=([0-9a-f]+)$")


def sim(t: Taxonomy, a: str, b: str, d_max: int) -> float:
    """Relatedness in [0, 1]; 1 only for identical synsets."""
    d = node_distance(t, a, b, d_max)
    if d is None:
        return 0.0
    return sig12(1.0 / (1.0 + d))


def canonical_pair(a: str, b: str) -> tuple[str, str]:
    """Order a synset pair lexicographically for table storage."""
    return (a, b) if a < b else (b, a)


@dataclass
class SimilarityTable:
    """Sparse map of nonzero relatedness values for unordered synset pairs.

    Absent pairs mean relatedness 0; identical pairs are answered without
    the table. ``taxonomy_digest`` pins the taxonomy the table was built
    from so a stale table is rejected instead of silently misused.
    """

    entries: dict[tuple[str, str], float] = field(default_factory=dict)
    d_max: int = 0
    taxonomy_digest: str = ""


def build_table(t: Taxonomy, d_max: int) -> SimilarityTable:
    """Precompute sim for every unordered pair within the distance cutoff.

    One breadth-first sweep per source node; a pair is recorded from its
    lexicographically smaller endpoint, so each shows up exactly once.
    """
    entries: dict[tuple[str, str], float] = {}
    try:
        for source in sorted(t.synsets):
            distances = {source: 0}
            frontier = [source]
            depth = 0
            while frontier and depth < d_max:
                depth += 1
                next_frontier = []
                for node in frontier:
                    for neighbor in t.neighbors(node):
                        if neighbor not in distances:
                            distances[neighbor] = depth
                            next_frontier.append(neighbor)
                frontier = next_frontier
            for target, d in distances.items():
                if source < target:
                    entries[(source, target)] = sig12(1.0 / (1.0 + d))
    except MemoryError as exc:
        raise BuildFailureError(f"table build ran out of memory: {exc}") from exc
    return SimilarityTable(entries=entries, d_max=d_max, taxonomy_digest=t.digest())


def table_lookup(tab: SimilarityTable, a: str, b: str) -> float:
    """Stored relatedness; 1.0 on identity, 0.0 for any absent pair."""
    if a == b:
        return 1.0
    return tab.entries.get(canonical_pair(a, b), 0.0)


def verify_table(tab: SimilarityTable, t: Taxonomy) -> None:
    """Reject a table built from a different taxonomy."""
    digest = t.digest()
    if tab.taxonomy_digest != digest:
        raise StaleTableError(
            f"table digest {tab.taxonomy_digest[:12]}… does not match "
            f"taxonomy digest {digest[:12]}…"
        )


def save_table(tab: SimilarityTable, path: Union[str, Path]) -> None:
    lines = [f"#wntags-sim v1 d_max={tab.d_max} digest={tab.taxonomy_digest}"]
    for (a, b) in sorted(tab.entries):
        lines.append(f"{a}\t{b}\t{fmt12(tab.entries[(a, b)])}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_table(path: Union[str, Path]) -> SimilarityTable:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise FormatError(1, "empty table file")
    m = _HEADER_RE.match(lines[0])
    if not m:
        raise FormatError(1, f"bad header {lines[0]!r}")
    tab = SimilarityTable(d_max=int(m.group(1)), taxonomy_digest=m.group(2))
    prev: tuple[str, str] | None = None
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise FormatError(line_no, f"expected 3 fields, got {len(fields)}")
        a, b, raw_value = fields
        if not SYNSET_ID_RE.match(a) or not SYNSET_ID_RE.match(b):
            raise FormatError(line_no, f"bad synset pair {a!r}, {b!r}")
        if not a < b:
            raise FormatError(line_no, f"pair {a}, {b} not in canonical order")
        if prev is not None and (a, b) <= prev:
            raise FormatError(line_no, f"pair {a}, {b} out of sort order")
        try:
            value = float(raw_value)
        except ValueError:
            raise FormatError(line_no, f"bad value {raw_value!r}") from None
        if not 0.0 < value <= 1.0:
            raise FormatError(line_no, f"value {raw_value} outside (0, 1]")
        tab.entries[(a, b)] = value
        prev = (a, b)
    return tab
