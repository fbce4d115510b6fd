"""HTTP/JSON API plus the engine wiring it exposes.

The engine owns startup (load taxonomy, attach similarity table, open
corpus) and serializes all corpus mutations through one writer lock.
Records are immutable snapshots, so read requests never block and never
see a half-applied annotation. Every mutation is appended to the corpus
file and fsynced before the request is acknowledged; a graceful shutdown
compacts the file back to canonical form.

All numbers on the wire are decimals with 12 significant digits.
"""

from __future__ import annotations

import os
import threading
from contextlib import asynccontextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, Header, Query as QueryParam, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import corpus as corpus_mod
from . import retrieval
from .corpus import Corpus, EmotionRating, TagAssignment
from .errors import ConfigError, EmptyQueryError, WntagsError
from .numfmt import round_floats
from .relatedness import SimilarityTable, build_table, load_table, save_table, verify_table
from .retrieval import DirectSimilarity, SimFn, TableSimilarity
from .taxonomy import Sense, Taxonomy, load_taxonomy

#: One documented HTTP status per machine-readable error code.
ERROR_STATUS = {
    "EmptyQuery": 400,
    "InvalidRange": 400,
    "InvalidParams": 400,
    "FormatError": 400,
    "SyntaxError": 400,
    "NotEnoughCandidates": 400,
    "ConfigError": 400,
    "UnknownImage": 404,
    "UnknownSynset": 404,
    "DuplicateImage": 409,
    "StaleTable": 409,
    "EmptyCorpus": 409,
    "InsufficientRaters": 409,
    "WeightOutOfRange": 422,
    "EmotionOutOfRange": 422,
    "UnknownLemma": 422,
    "NoSenseFound": 422,
}

CONFIG_ENV_VAR = "WNTAGS_CONFIG"
DEFAULT_LISTEN = "127.0.0.1:8011"


@dataclass
class EngineConfig:
    taxonomy_path: Path
    corpus_path: Path
    table_path: Optional[Path] = None
    default_d_max: int = retrieval.DEFAULT_D_MAX
    listen_address: str = DEFAULT_LISTEN
    include_drafts: bool = False


_CONFIG_KEYS = {
    "taxonomy_path", "corpus_path", "table_path",
    "default_d_max", "listen_address", "include_drafts",
}


def load_config(path: Union[str, Path]) -> EngineConfig:
    """Parse a key=value config file; relative paths resolve beside it."""
    path = Path(path)
    base = path.parent
    values: dict[str, str] = {}
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in _CONFIG_KEYS:
            raise ConfigError(f"line {line_no}: unknown or malformed entry {raw!r}")
        values[key] = value.strip()

    for required in ("taxonomy_path", "corpus_path"):
        if required not in values:
            raise ConfigError(f"missing required config key {required}")

    def _resolve(p: str) -> Path:
        candidate = Path(p)
        return candidate if candidate.is_absolute() else base / candidate

    d_max = int(values.get("default_d_max", retrieval.DEFAULT_D_MAX))
    if d_max < 0:
        raise ConfigError("default_d_max must be >= 0")
    return EngineConfig(
        taxonomy_path=_resolve(values["taxonomy_path"]),
        corpus_path=_resolve(values["corpus_path"]),
        table_path=_resolve(values["table_path"]) if values.get("table_path") else None,
        default_d_max=d_max,
        listen_address=values.get("listen_address", DEFAULT_LISTEN),
        include_drafts=values.get("include_drafts", "false").lower() in ("1", "true", "yes"),
    )


def config_from_env() -> EngineConfig:
    path = os.environ.get(CONFIG_ENV_VAR)
    if not path:
        raise ConfigError(f"{CONFIG_ENV_VAR} is not set")
    return load_config(path)


class Engine:
    """Loaded taxonomy + corpus + optional similarity table behind one lock."""

    def __init__(self, config: EngineConfig, taxonomy: Taxonomy,
                 corpus: Corpus, table: Optional[SimilarityTable]):
        self.config = config
        self.taxonomy = taxonomy
        self.corpus = corpus
        self.table = table
        self._write_lock = threading.Lock()

    @classmethod
    def open(cls, config: EngineConfig) -> "Engine":
        if not Path(config.taxonomy_path).exists():
            raise ConfigError(f"taxonomy file not found: {config.taxonomy_path}")
        if not Path(config.corpus_path).exists():
            raise ConfigError(f"corpus file not found: {config.corpus_path}")
        taxonomy = load_taxonomy(config.taxonomy_path)
        corpus = corpus_mod.load_corpus(config.corpus_path)
        table = None
        if config.table_path is not None:
            table = load_table(config.table_path)
            verify_table(table, taxonomy)
        return cls(config, taxonomy, corpus, table)

    def close(self) -> None:
        """Compact the corpus file; pending appends become canonical lines."""
        with self._write_lock:
            corpus_mod.save_corpus(self.corpus, self.config.corpus_path)

    def sim_source(self, d_max: Optional[int] = None) -> SimFn:
        d = self.config.default_d_max if d_max is None else d_max
        if self.table is not None:
            return TableSimilarity(self.table, self.taxonomy, d)
        return DirectSimilarity(self.taxonomy, d)

    def add_image(self, image_id: str, source_ref: str, iaps_keyword: str,
                  emotion: EmotionRating):
        with self._write_lock:
            record = corpus_mod.add_image(self.corpus, image_id, source_ref,
                                          iaps_keyword, emotion)
            corpus_mod.append_record(self.config.corpus_path, record)
            return record

    def annotate(self, image_id: str, assignment: TagAssignment):
        with self._write_lock:
            record = corpus_mod.annotate(self.corpus, image_id, assignment,
                                         self.taxonomy)
            corpus_mod.append_record(self.config.corpus_path, record)
            return record

    def rebuild_table(self, d_max: Optional[int] = None) -> SimilarityTable:
        d = self.config.default_d_max if d_max is None else d_max
        table = build_table(self.taxonomy, d)
        if self.config.table_path is not None:
            save_table(table, self.config.table_path)
        self.table = table
        return table


# -- payload shaping ----------------------------------------------------------

def synset_payload(engine: Engine, synset_id: str) -> dict:
    syn = engine.taxonomy.require(synset_id)
    return {
        "id": syn.id,
        "pos": syn.pos,
        "lemmas": list(syn.lemmas),
        "relations": [{"type": rel, "target": target} for rel, target in syn.relations],
        "gloss": syn.gloss,
    }


def record_payload(record) -> dict:
    return {
        "id": record.id,
        "source_ref": record.source_ref,
        "iaps_keyword": record.iaps_keyword,
        "emotion": {
            "val": record.emotion.valence,
            "ar": record.emotion.arousal,
            "dom": record.emotion.dominance,
        },
        "publishable": record.publishable,
        "annotators": sorted(record.annotators),
        "weighted_tags": [
            {
                "synset": t.sense.synset,
                "lemma": t.sense.lemma,
                "mean_weight": t.mean_weight,
                "rater_count": t.rater_count,
            }
            for t in record.weighted_tags
        ],
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


def result_payload(engine: Engine, result) -> dict:
    record = engine.corpus.require(result.image_id)
    return {
        "image_id": result.image_id,
        "raw_score": result.raw_score,
        "relevance": result.relevance,
        "contributions": [
            {
                "query_synset": c.query_synset,
                "image_synset": c.image_synset,
                "mean_weight": c.mean_weight,
                "sim": c.sim,
            }
            for c in result.contributions
        ],
        "image": {
            "source_ref": record.source_ref,
            "iaps_keyword": record.iaps_keyword,
            "emotion": {
                "val": record.emotion.valence,
                "ar": record.emotion.arousal,
                "dom": record.emotion.dominance,
            },
        },
    }


class EmotionIn(BaseModel):
    val: float
    ar: float
    dom: float


class ImageIn(BaseModel):
    id: str
    source_ref: str = ""
    iaps_keyword: str = ""
    emotion: EmotionIn


class AnnotationIn(BaseModel):
    synset: str
    lemma: str
    weight: float


class RebuildIn(BaseModel):
    d_max: Optional[int] = None


def _json(payload, status_code: int = 200) -> JSONResponse:
    return JSONResponse(round_floats(payload), status_code=status_code)


def _range_param(lo: Optional[float], hi: Optional[float]):
    if lo is None and hi is None:
        return None
    return (1.0 if lo is None else lo, 9.0 if hi is None else hi)


def create_app(engine: Engine) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        engine.close()

    app = FastAPI(title="wntags", docs_url=None, redoc_url=None, lifespan=lifespan)

    @app.exception_handler(WntagsError)
    async def _domain_error(request: Request, exc: WntagsError):
        body = {"error": {"code": exc.code, "message": str(exc)}}
        if hasattr(exc, "unmatched"):
            body["error"]["unmatched"] = list(exc.unmatched)
        return JSONResponse(body, status_code=ERROR_STATUS.get(exc.code, 500))

    @app.get("/api/lemmas")
    def lemmas(q: str = QueryParam(""), limit: int = QueryParam(20, ge=1, le=200)):
        matches = []
        for lemma in sorted(engine.taxonomy.lemma_index):
            if lemma.startswith(q):
                matches.append({
                    "lemma": lemma,
                    "synsets": sorted(engine.taxonomy.lemma_index[lemma]),
                })
                if len(matches) >= limit:
                    break
        return _json({"lemmas": matches})

    @app.get("/api/synsets/{synset_id}")
    def synset(synset_id: str):
        return _json(synset_payload(engine, synset_id))

    @app.get("/api/images/{image_id}")
    def image(image_id: str):
        return _json(record_payload(engine.corpus.require(image_id)))

    @app.post("/api/images", status_code=201)
    def create_image(body: ImageIn):
        record = engine.add_image(
            body.id, body.source_ref, body.iaps_keyword,
            EmotionRating(body.emotion.val, body.emotion.ar, body.emotion.dom),
        )
        return _json(record_payload(record), status_code=201)

    @app.post("/api/images/{image_id}/annotations")
    def annotate_image(image_id: str, body: AnnotationIn,
                       x_annotator: str = Header(...)):
        record = engine.annotate(
            image_id,
            TagAssignment(x_annotator, Sense(body.synset, body.lemma), body.weight),
        )
        return _json(record_payload(record))

    @app.get("/api/images/{image_id}/agreement")
    def agreement(image_id: str):
        report = corpus_mod.agreement_kappa(engine.corpus, image_id)
        return _json({
            "kappa": report.kappa,
            "flagged": list(report.flagged),
            "low_agreement": report.low_agreement,
            "subjects": report.subjects,
            "raters": report.raters,
        })

    @app.get("/api/search")
    def search_endpoint(
        q: Optional[str] = QueryParam(None),
        d_max: Optional[int] = QueryParam(None, ge=0),
        limit: Optional[int] = QueryParam(None, ge=1),
        val_min: Optional[float] = QueryParam(None),
        val_max: Optional[float] = QueryParam(None),
        ar_min: Optional[float] = QueryParam(None),
        ar_max: Optional[float] = QueryParam(None),
        dom_min: Optional[float] = QueryParam(None),
        dom_max: Optional[float] = QueryParam(None),
        keyword: Optional[str] = QueryParam(None),
        include_drafts: Optional[bool] = QueryParam(None),
    ):
        drafts = engine.config.include_drafts if include_drafts is None else include_drafts
        effective_d = engine.config.default_d_max if d_max is None else d_max
        ranges = {
            "val_range": _range_param(val_min, val_max),
            "ar_range": _range_param(ar_min, ar_max),
            "dom_range": _range_param(dom_min, dom_max),
        }

        if q is None or not q.strip():
            # Legacy retrieval dimension: exact keyword match, ordered by id.
            if not keyword:
                raise EmptyQueryError("supply q or keyword")
            ids = retrieval.search_by_keyword(engine.corpus, keyword)
            items = [{"image_id": i,
                      "image": record_payload(engine.corpus.require(i))} for i in ids]
            return _json({"mode": "keyword", "results": items, "count": len(items)})

        query = retrieval.parse_query(engine.taxonomy, q, d_max=effective_d)
        results = retrieval.search(engine.corpus, query,
                                   engine.sim_source(effective_d),
                                   limit=None, include_drafts=drafts)
        results = retrieval.filter_affect(results, engine.corpus, **ranges)
        if keyword is not None:
            needle = keyword.lower()
            results = [
                r for r in results
                if engine.corpus.require(r.image_id).iaps_keyword.lower() == needle
            ]
        if limit is not None:
            results = results[:limit]
        return _json({
            "mode": "semantic",
            "query": {
                "raw_text": query.raw_text,
                "d_max": query.d_max,
                "matched": [
                    {"lemma": s.lemma, "tokens": [s.start, s.end],
                     "synsets": sorted(s.synsets)}
                    for s in query.matched_spans
                ],
                "unmatched": list(query.unmatched_tokens),
            },
            "results": [result_payload(engine, r) for r in results],
            "count": len(results),
        })

    @app.get("/api/stats/tags")
    def stats():
        s = corpus_mod.tag_count_stats(engine.corpus,
                                       include_drafts=engine.config.include_drafts)
        return _json({
            "median": s.median, "mean": s.mean, "sd": s.sd,
            "min": s.min, "max": s.max, "n_images": s.n_images,
        })

    @app.post("/api/admin/rebuild-sim")
    def rebuild(body: RebuildIn):
        table = engine.rebuild_table(body.d_max)
        return _json({
            "d_max": table.d_max,
            "entries": len(table.entries),
            "digest": table.taxonomy_digest,
        })

    return app


def serve(config: EngineConfig) -> None:
    """Start the HTTP service; startup failures exit with one diagnostic."""
    import uvicorn

    engine = Engine.open(config)
    app = create_app(engine)
    host, _, port = config.listen_address.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8011), log_level="info")
