"""HTTP API tests run against the in-process app via TestClient."""

import json
import shutil

import pytest
from fastapi.testclient import TestClient

from conftest import FIXTURES
from wntags.errors import ConfigError, StaleTableError
from wntags.relatedness import build_table, save_table
from wntags.service import (
    CONFIG_ENV_VAR,
    Engine,
    EngineConfig,
    config_from_env,
    create_app,
    load_config,
)
from wntags.taxonomy import load_taxonomy


@pytest.fixture
def paths(tmp_path):
    tax = tmp_path / "basic.tax"
    corp = tmp_path / "corpus.jsonl"
    shutil.copy(FIXTURES / "basic.tax", tax)
    shutil.copy(FIXTURES / "corpus.jsonl", corp)
    return tax, corp


@pytest.fixture
def engine(paths):
    tax, corp = paths
    return Engine.open(EngineConfig(taxonomy_path=tax, corpus_path=corp))


@pytest.fixture
def client(engine):
    with TestClient(create_app(engine)) as c:
        yield c


def err(response):
    body = response.json()
    assert set(body) == {"error"}
    return body["error"]


# -- lookup endpoints ---------------------------------------------------------

def test_lemmas_prefix_and_limit(client):
    r = client.get("/api/lemmas", params={"q": "c"})
    assert r.status_code == 200
    lemmas = [m["lemma"] for m in r.json()["lemmas"]]
    assert lemmas == ["car", "cat"]
    r = client.get("/api/lemmas", params={"q": "", "limit": 3})
    assert len(r.json()["lemmas"]) == 3


def test_synset_payload(client):
    r = client.get("/api/synsets/n-3")
    assert r.status_code == 200
    body = r.json()
    assert body["id"] == "n-3"
    assert body["lemmas"] == ["dog"]
    assert {"type": "hypernym", "target": "n-1"} in body["relations"]


def test_unknown_synset_404(client):
    r = client.get("/api/synsets/n-999")
    assert r.status_code == 404
    assert err(r)["code"] == "UnknownSynset"


def test_image_payload(client):
    r = client.get("/api/images/7175")
    assert r.status_code == 200
    body = r.json()
    assert body["iaps_keyword"] == "lamp"
    assert body["emotion"] == {"val": 4.87, "ar": 1.72, "dom": 6.24}
    assert body["publishable"] is True
    assert body["annotators"] == ["ann1", "ann2"]
    tags = {t["synset"]: t["mean_weight"] for t in body["weighted_tags"]}
    assert tags == {"n-20": 0.5, "n-21": 0.4, "n-30": 0.8}


def test_unknown_image_404(client):
    r = client.get("/api/images/0000")
    assert r.status_code == 404
    assert err(r)["code"] == "UnknownImage"


# -- mutations ------------------------------------------------------------------

NEW_IMAGE = {
    "id": "5500",
    "source_ref": "iaps:5500",
    "iaps_keyword": "boat",
    "emotion": {"val": 6.0, "ar": 3.0, "dom": 5.0},
}


def test_create_image(client):
    r = client.post("/api/images", json=NEW_IMAGE)
    assert r.status_code == 201
    assert r.json()["publishable"] is False
    assert client.get("/api/images/5500").status_code == 200


def test_create_duplicate_409(client):
    assert client.post("/api/images", json=NEW_IMAGE).status_code == 201
    r = client.post("/api/images", json=NEW_IMAGE)
    assert r.status_code == 409
    assert err(r)["code"] == "DuplicateImage"


def test_create_image_emotion_bounds_422(client):
    bad = dict(NEW_IMAGE, emotion={"val": 0.5, "ar": 3.0, "dom": 5.0})
    r = client.post("/api/images", json=bad)
    assert r.status_code == 422
    assert err(r)["code"] == "EmotionOutOfRange"


def test_annotate_flow(client):
    r = client.post(
        "/api/images/2200/annotations",
        json={"synset": "n-3", "lemma": "dog", "weight": 0.5},
        headers={"X-Annotator": "ann3"},
    )
    assert r.status_code == 200
    body = r.json()
    assert "ann3" in body["annotators"]
    tags = {t["synset"]: t for t in body["weighted_tags"]}
    # mean over ann1 0.9, ann2 0.7, ann3 0.5
    assert tags["n-3"]["mean_weight"] == 0.7
    assert tags["n-3"]["rater_count"] == 3


def test_annotate_weight_bounds_422(client):
    r = client.post(
        "/api/images/2200/annotations",
        json={"synset": "n-3", "lemma": "dog", "weight": 1.5},
        headers={"X-Annotator": "ann3"},
    )
    assert r.status_code == 422
    assert err(r)["code"] == "WeightOutOfRange"


def test_annotate_unknown_synset_404(client):
    r = client.post(
        "/api/images/2200/annotations",
        json={"synset": "n-999", "lemma": "dog", "weight": 0.5},
        headers={"X-Annotator": "ann3"},
    )
    assert r.status_code == 404
    assert err(r)["code"] == "UnknownSynset"


def test_annotate_lemma_synset_mismatch_422(client):
    r = client.post(
        "/api/images/2200/annotations",
        json={"synset": "n-3", "lemma": "cat", "weight": 0.5},
        headers={"X-Annotator": "ann3"},
    )
    assert r.status_code == 422
    assert err(r)["code"] == "UnknownLemma"


def test_annotate_requires_annotator_header(client):
    r = client.post(
        "/api/images/2200/annotations",
        json={"synset": "n-3", "lemma": "dog", "weight": 0.5},
    )
    assert r.status_code == 422  # framework validation, not a domain error


def test_mutation_is_appended_before_ack(paths, engine):
    tax, corp = paths
    with TestClient(create_app(engine)) as c:
        c.post("/api/images", json=NEW_IMAGE)
        # visible in the file before shutdown/compaction
        lines = corp.read_text().splitlines()
        last = json.loads(lines[-1])
        assert last["id"] == "5500"
    # context exit runs lifespan shutdown: file is compacted, record retained
    data = [json.loads(line) for line in corp.read_text().splitlines() if line.strip()]
    ids = [d["id"] for d in data]
    assert ids == sorted(ids)
    assert "5500" in ids


# -- agreement ---------------------------------------------------------------------

def test_agreement_wire_value(client):
    r = client.get("/api/images/2510/agreement")
    assert r.status_code == 200
    body = r.json()
    assert body["subjects"] == 3
    assert body["raters"] == 2
    assert body["low_agreement"] is True
    # kappa is -1/11, carried with 12 significant digits on the wire
    assert "-0.0909090909091" in r.text
    assert body["kappa"] == float(format(-1 / 11, ".12g"))


def test_agreement_single_rater_409(client):
    r = client.get("/api/images/6100/agreement")
    assert r.status_code == 409
    assert err(r)["code"] == "InsufficientRaters"


# -- search -------------------------------------------------------------------------

def test_search_semantic_order(client):
    r = client.get("/api/search", params={"q": "dog"})
    assert r.status_code == 200
    body = r.json()
    assert body["mode"] == "semantic"
    assert [x["image_id"] for x in body["results"]] == ["2200", "2510", "9400", "7175"]
    assert body["count"] == 4
    assert body["query"]["matched"][0]["lemma"] == "dog"
    top = body["results"][0]
    assert top["relevance"] == pytest.approx(0.6818181818181818, abs=1e-12)
    assert top["image"]["iaps_keyword"] == "dog"


def test_search_repeat_is_byte_identical(client):
    a = client.get("/api/search", params={"q": "attack dog", "d_max": 5, "limit": 10})
    b = client.get("/api/search", params={"q": "attack dog", "d_max": 5, "limit": 10})
    assert a.status_code == b.status_code == 200
    assert a.content == b.content


def test_search_d_max_zero_drops_neighbours(client):
    r = client.get("/api/search", params={"q": "cat", "d_max": 0})
    ids = [x["image_id"] for x in r.json()["results"]]
    assert ids == ["2510"]


def test_search_limit(client):
    r = client.get("/api/search", params={"q": "dog", "limit": 2})
    assert r.json()["count"] == 2


def test_search_affect_filter(client):
    r = client.get("/api/search", params={"q": "dog", "val_max": 3.0})
    ids = [x["image_id"] for x in r.json()["results"]]
    assert ids == ["2200"]


def test_search_affect_filter_bad_range(client):
    r = client.get("/api/search", params={"q": "dog", "val_min": 5.0, "val_max": 2.0})
    assert r.status_code == 400
    assert err(r)["code"] == "InvalidRange"


def test_search_include_drafts(client):
    r = client.get("/api/search", params={"q": "dog", "include_drafts": "true"})
    ids = [x["image_id"] for x in r.json()["results"]]
    assert "6100" in ids


def test_search_keyword_mode(client):
    r = client.get("/api/search", params={"keyword": "LAMP"})
    body = r.json()
    assert body["mode"] == "keyword"
    assert [x["image_id"] for x in body["results"]] == ["7175"]


def test_search_semantic_plus_keyword_narrows(client):
    r = client.get("/api/search", params={"q": "dog", "keyword": "cat"})
    ids = [x["image_id"] for x in r.json()["results"]]
    assert ids == ["2510"]


def test_search_requires_query_or_keyword(client):
    r = client.get("/api/search")
    assert r.status_code == 400
    assert err(r)["code"] == "EmptyQuery"
    r = client.get("/api/search", params={"q": "   "})
    assert r.status_code == 400


def test_search_no_sense_found_lists_unmatched(client):
    r = client.get("/api/search", params={"q": "purple unicorn"})
    assert r.status_code == 422
    e = err(r)
    assert e["code"] == "NoSenseFound"
    assert e["unmatched"] == ["purple", "unicorn"]


# -- stats and admin -------------------------------------------------------------------

def test_stats_endpoint(client):
    r = client.get("/api/stats/tags")
    body = r.json()
    assert body["n_images"] == 4
    assert body["median"] == 3
    assert body["mean"] == 3.25


def test_rebuild_sim_roundtrip(paths):
    tax, corp = paths
    table_path = tax.parent / "sim.tsv"
    config = EngineConfig(taxonomy_path=tax, corpus_path=corp, table_path=table_path)
    save_table(build_table(load_taxonomy(tax), 10), table_path)
    engine = Engine.open(config)
    with TestClient(create_app(engine)) as c:
        before = c.get("/api/search", params={"q": "dog"}).content
        r = c.post("/api/admin/rebuild-sim", json={"d_max": 10})
        assert r.status_code == 200
        body = r.json()
        assert body["d_max"] == 10
        assert body["digest"] == load_taxonomy(tax).digest()
        assert body["entries"] > 0
        after = c.get("/api/search", params={"q": "dog"}).content
    assert before == after


def test_table_backed_search_matches_direct(paths, client):
    tax, corp = paths
    table_path = tax.parent / "sim.tsv"
    save_table(build_table(load_taxonomy(tax), 10), table_path)
    engine = Engine.open(EngineConfig(taxonomy_path=tax, corpus_path=corp,
                                      table_path=table_path))
    with TestClient(create_app(engine)) as tabled:
        a = client.get("/api/search", params={"q": "car wheel"}).content
        b = tabled.get("/api/search", params={"q": "car wheel"}).content
    assert a == b


# -- engine startup ----------------------------------------------------------------------

def test_open_refuses_stale_table(paths, tmp_path):
    tax, corp = paths
    other = load_taxonomy(FIXTURES / "basic.tax")
    table_path = tmp_path / "sim.tsv"
    save_table(build_table(other, 10), table_path)
    # grow the taxonomy so the stored digest no longer matches
    tax.write_text(tax.read_text() + "n-99\tn\tzebra\t-\t-\n")
    with pytest.raises(StaleTableError):
        Engine.open(EngineConfig(taxonomy_path=tax, corpus_path=corp,
                                 table_path=table_path))


def test_open_missing_files(tmp_path):
    with pytest.raises(ConfigError):
        Engine.open(EngineConfig(taxonomy_path=tmp_path / "no.tax",
                                 corpus_path=tmp_path / "no.jsonl"))


# -- config files ------------------------------------------------------------------------

def test_load_config_resolves_relative_paths(tmp_path):
    cfg = tmp_path / "svc.conf"
    cfg.write_text(
        "# service config\n"
        "taxonomy_path = data/basic.tax\n"
        "corpus_path = /var/lib/corpus.jsonl\n"
        "default_d_max = 6\n"
        "listen_address = 0.0.0.0:9000\n"
        "include_drafts = true\n"
    )
    config = load_config(cfg)
    assert config.taxonomy_path == tmp_path / "data" / "basic.tax"
    assert str(config.corpus_path) == "/var/lib/corpus.jsonl"
    assert config.default_d_max == 6
    assert config.listen_address == "0.0.0.0:9000"
    assert config.include_drafts is True
    assert config.table_path is None


@pytest.mark.parametrize("text", [
    "taxonomy_path=a.tax\n",                      # corpus_path missing
    "taxonomy_path=a.tax\ncorpus_path=c\nwat=1\n",  # unknown key
    "taxonomy_path=a.tax\ncorpus_path=c\ndefault_d_max=-1\n",
    "just a line without equals\n",
])
def test_load_config_rejects_bad_files(tmp_path, text):
    cfg = tmp_path / "svc.conf"
    cfg.write_text(text)
    with pytest.raises(ConfigError):
        load_config(cfg)


def test_config_from_env(tmp_path, monkeypatch):
    monkeypatch.delenv(CONFIG_ENV_VAR, raising=False)
    with pytest.raises(ConfigError):
        config_from_env()
    cfg = tmp_path / "svc.conf"
    cfg.write_text("taxonomy_path=a.tax\ncorpus_path=c.jsonl\n")
    monkeypatch.setenv(CONFIG_ENV_VAR, str(cfg))
    assert config_from_env().taxonomy_path == tmp_path / "a.tax"


# -- wire number format --------------------------------------------------------------------

def test_wire_floats_are_12_significant_digits(client):
    r = client.get("/api/search", params={"q": "poodle"})
    body = json.loads(r.content)
    for result in body["results"]:
        for value in (result["raw_score"], result["relevance"]):
            assert value == float(format(value, ".12g"))
