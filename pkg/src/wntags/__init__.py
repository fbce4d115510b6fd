"""Semantic annotation and ranked retrieval for emotionally annotated images.

The package keeps a lexical taxonomy of synsets, lets groups of annotators
attach weighted senses to images alongside valence/arousal/dominance
ratings, and answers free-text queries by ranking images on taxonomy
relatedness. An evaluation harness and an HTTP/JSON service sit on top.
"""

from .corpus import (
    AgreementReport,
    Corpus,
    EmotionRating,
    ImageRecord,
    TagAssignment,
    WeightedTag,
    add_image,
    agreement_kappa,
    annotate,
    compute_weighted_tags,
    load_corpus,
    save_corpus,
    tag_count_stats,
)
from .errors import WntagsError
from .evaluation import (
    DistanceJudge,
    Judgments,
    SyntheticParams,
    emit_curves,
    generate_synthetic,
    precision_tp,
    render_curves,
    run_batch,
    select_query_terms,
)
from .relatedness import SimilarityTable, build_table, load_table, save_table, sim, table_lookup
from .retrieval import (
    DirectSimilarity,
    Query,
    RankedResult,
    TableSimilarity,
    adaptive_search,
    filter_affect,
    parse_query,
    search,
    search_by_keyword,
)
from .taxonomy import Sense, Synset, Taxonomy, load_taxonomy, node_distance, neighborhood, save_taxonomy

__version__ = "0.1.0"

__all__ = [
    "AgreementReport", "Corpus", "DirectSimilarity", "DistanceJudge",
    "EmotionRating", "ImageRecord", "Judgments", "Query", "RankedResult",
    "Sense", "SimilarityTable", "Synset", "SyntheticParams",
    "TableSimilarity", "TagAssignment", "Taxonomy", "WeightedTag",
    "WntagsError", "adaptive_search", "add_image", "agreement_kappa",
    "annotate", "build_table", "compute_weighted_tags", "emit_curves",
    "filter_affect", "generate_synthetic", "load_corpus", "load_table",
    "load_taxonomy", "neighborhood", "node_distance", "parse_query",
    "precision_tp", "render_curves", "run_batch", "save_corpus",
    "save_table", "save_taxonomy", "search", "search_by_keyword",
    "select_query_terms", "sim", "table_lookup", "tag_count_stats",
]
