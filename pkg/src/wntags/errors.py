"""Exception hierarchy shared across the engine.

Every error carries a stable machine-readable ``code`` so the HTTP layer
and the CLI can map failures without string matching.
"""

from __future__ import annotations


class WntagsError(Exception):
    """Base class for all engine errors."""

    code = "InternalError"


# -- taxonomy ---------------------------------------------------------------

class TaxonomySyntaxError(WntagsError):
    code = "SyntaxError"

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DanglingEdgeError(WntagsError):
    code = "DanglingEdge"

    def __init__(self, source: str, target: str):
        super().__init__(f"relation from {source} points at unknown synset {target}")
        self.source = source
        self.target = target


class AsymmetricEdgeError(WntagsError):
    code = "AsymmetricEdge"

    def __init__(self, a: str, b: str, relation: str):
        super().__init__(f"{relation} edge {a} -> {b} has no inverse")
        self.a = a
        self.b = b
        self.relation = relation


class DuplicateSynsetError(WntagsError):
    code = "DuplicateSynset"

    def __init__(self, synset_id: str):
        super().__init__(f"synset {synset_id} defined twice")
        self.synset_id = synset_id


class UnknownSynsetError(WntagsError):
    code = "UnknownSynset"

    def __init__(self, synset_id: str):
        super().__init__(f"unknown synset {synset_id}")
        self.synset_id = synset_id


# -- similarity table -------------------------------------------------------

class StaleTableError(WntagsError):
    code = "StaleTable"


class BuildFailureError(WntagsError):
    code = "BuildFailure"


class FormatError(WntagsError):
    code = "FormatError"

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


# -- corpus -----------------------------------------------------------------

class DuplicateImageError(WntagsError):
    code = "DuplicateImage"

    def __init__(self, image_id: str):
        super().__init__(f"image {image_id} already exists")
        self.image_id = image_id


class UnknownImageError(WntagsError):
    code = "UnknownImage"

    def __init__(self, image_id: str):
        super().__init__(f"unknown image {image_id}")
        self.image_id = image_id


class EmotionOutOfRangeError(WntagsError):
    code = "EmotionOutOfRange"

    def __init__(self, dimension: str, value: float):
        super().__init__(f"{dimension}={value} outside [1, 9]")
        self.dimension = dimension
        self.value = value


class WeightOutOfRangeError(WntagsError):
    code = "WeightOutOfRange"

    def __init__(self, value: float):
        super().__init__(f"weight {value} outside [0, 1]")
        self.value = value


class UnknownLemmaError(WntagsError):
    code = "UnknownLemma"

    def __init__(self, synset_id: str, lemma: str):
        super().__init__(f"lemma {lemma!r} is not a member of synset {synset_id}")
        self.synset_id = synset_id
        self.lemma = lemma


class InsufficientRatersError(WntagsError):
    code = "InsufficientRaters"


class EmptyCorpusError(WntagsError):
    code = "EmptyCorpus"


# -- retrieval --------------------------------------------------------------

class EmptyQueryError(WntagsError):
    code = "EmptyQuery"


class NoSenseFoundError(WntagsError):
    code = "NoSenseFound"

    def __init__(self, unmatched: list[str]):
        super().__init__(f"no taxonomy sense matches: {' '.join(unmatched)}")
        self.unmatched = unmatched


class InvalidRangeError(WntagsError):
    code = "InvalidRange"


# -- evaluation -------------------------------------------------------------

class NotEnoughCandidatesError(WntagsError):
    code = "NotEnoughCandidates"


class InvalidParamsError(WntagsError):
    code = "InvalidParams"


class EmptyReportError(WntagsError):
    code = "EmptyReport"


# -- service ----------------------------------------------------------------

class ConfigError(WntagsError):
    code = "ConfigError"
