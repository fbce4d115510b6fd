"""Release acceptance suite.

One test per criterion; the terminal summary prints a PASS/FAIL line for
each (see conftest). Every check runs against an independent oracle or a
frozen golden file, never against numbers the implementation produced in
the same run. Headline figures from the original human-judged study are
intentionally NOT targets here: they are not reproducible without the
licensed image set and its annotators.
"""

import itertools
import json
import random
import time
from fractions import Fraction

import pytest

import oracles
from conftest import FIXTURES, GOLDEN
from wntags.corpus import (
    Corpus,
    EmotionRating,
    TagAssignment,
    add_image,
    agreement_kappa,
    annotate,
    load_corpus,
    save_corpus,
    tag_count_stats,
)
from wntags.errors import StaleTableError
from wntags.evaluation import (
    BatchParams,
    SyntheticParams,
    emit_curves,
    generate_synthetic,
    run_batch,
    select_query_terms,
)
from wntags.relatedness import build_table, load_table, save_table, sim, table_lookup, verify_table
from wntags.retrieval import DirectSimilarity, TableSimilarity, parse_query, search
from wntags.service import Engine, EngineConfig
from wntags.taxonomy import (
    Sense,
    dump_taxonomy,
    load_taxonomy,
    node_distance,
    save_taxonomy,
)


@pytest.mark.criterion("distance-oracle")
def test_distance_matches_naive_bfs():
    # 20 random taxonomies, every pair, every d_max; exact; < 10 s
    start = time.monotonic()
    rng = random.Random(101)
    for _ in range(20):
        t = oracles.random_taxonomy(rng, rng.randint(5, 50))
        adj = oracles.adjacency(t)
        ids = sorted(t.synsets)
        full = {a: oracles.bfs_distances_from(adj, a) for a in ids}
        for d_max in (0, 1, 3, 10):
            for a, b in itertools.combinations_with_replacement(ids, 2):
                d = full[a].get(b)
                expected = d if d is not None and d <= d_max else None
                assert node_distance(t, a, b, d_max) == expected
    assert time.monotonic() - start < 10.0


@pytest.mark.criterion("similarity-identities")
def test_similarity_identities_exhaustive(fixture_taxonomy):
    t = fixture_taxonomy
    adj = oracles.adjacency(t)
    ids = sorted(t.synsets)
    for d_max in (0, 1, 3, 10):
        for a in ids:
            assert sim(t, a, a, d_max) == 1.0
            for b in ids:
                value = sim(t, a, b, d_max)
                assert value == sim(t, b, a, d_max)
                d = oracles.bfs_distance(adj, a, b)
                if d is not None and d <= d_max:
                    assert value == oracles.quantize12(1.0 / (1.0 + d))
                else:
                    assert value == 0.0


@pytest.mark.criterion("table-equivalence")
def test_table_equals_direct_similarity():
    rng = random.Random(202)
    t = oracles.random_taxonomy(rng, 200)
    d_max = 8
    table = build_table(t, d_max)
    for a, b in itertools.combinations_with_replacement(sorted(t.synsets), 2):
        assert table_lookup(table, a, b) == sim(t, a, b, d_max)

    # end to end: identical search results with and without the table
    c = oracles.random_corpus(rng, t, 30)
    direct = DirectSimilarity(t, d_max)
    tabled = TableSimilarity(table, t, d_max)
    lemmas = sorted(t.lemma_index)
    for _ in range(20):
        q = parse_query(t, rng.choice(lemmas), d_max=d_max)
        assert search(c, q, direct) == search(c, q, tabled)


@pytest.mark.criterion("scoring-oracle")
def test_scoring_matches_brute_force():
    rng = random.Random(303)
    for _ in range(10):
        t = oracles.random_taxonomy(rng, rng.randint(20, 60))
        c = oracles.random_corpus(rng, t, rng.randint(10, 50))
        lemmas = sorted(t.lemma_index)
        d_max = rng.choice([3, 5, 10])
        simfn = DirectSimilarity(t, d_max)
        for _ in range(20):
            text = " ".join(rng.sample(lemmas, rng.randint(1, 2)))
            q = parse_query(t, text, d_max=d_max)
            got = search(c, q, simfn)
            want = oracles.brute_force_search(t, c, q.synsets, d_max)
            assert [r.image_id for r in got] == [w[0] for w in want]
            for r, w in zip(got, want):
                assert r.raw_score == pytest.approx(w[1], abs=1e-9)
                assert r.relevance == pytest.approx(w[2], abs=1e-9)


@pytest.mark.criterion("weight-averaging")
def test_incremental_mean_equals_batch_mean():
    rng = random.Random(404)
    t = oracles.random_taxonomy(rng, 6)
    lemma = t.synsets["n-1"].lemmas[0]
    for _ in range(200):
        c = Corpus()
        add_image(c, "im1", "", "kw", EmotionRating(5.0, 5.0, 5.0))
        weights = [rng.randint(0, 1000) / 1000 for _ in range(rng.randint(1, 8))]
        for i, w in enumerate(weights):
            annotate(c, "im1", TagAssignment(f"r{i}", Sense("n-1", lemma), w), t)
        [tag] = c.images["im1"].weighted_tags
        batch = float(sum(Fraction(w) for w in weights) / len(weights))
        assert tag.mean_weight == batch
        assert tag.rater_count == len(weights)


@pytest.mark.criterion("monotonicity")
def test_raising_d_max_never_drops_or_lowers():
    rng = random.Random(505)
    cases = 0
    while cases < 1000:
        t = oracles.random_taxonomy(rng, rng.randint(10, 40))
        c = oracles.random_corpus(rng, t, rng.randint(5, 15))
        lemmas = sorted(t.lemma_index)
        for _ in range(25):
            text = " ".join(rng.sample(lemmas, rng.randint(1, 2)))
            d_lo = rng.randint(0, 8)
            d_hi = d_lo + rng.randint(1, 6)
            lo = search(c, parse_query(t, text, d_max=d_lo), DirectSimilarity(t, d_lo))
            hi = search(c, parse_query(t, text, d_max=d_hi), DirectSimilarity(t, d_hi))
            wider = {r.image_id: r for r in hi}
            for r in lo:
                assert r.image_id in wider
                assert wider[r.image_id].raw_score >= r.raw_score
            cases += 1


@pytest.mark.criterion("ordering-invariance")
def test_weight_scaling_preserves_order():
    rng = random.Random(606)
    t = oracles.random_taxonomy(rng, 40)
    ids = sorted(t.synsets)
    lemmas = sorted(t.lemma_index)

    # base weights stay <= 1/7 so every tested scale keeps them in [0, 1]
    plan = []
    for i in range(1, 13):
        tags = []
        for synset in rng.sample(ids, rng.randint(3, 6)):
            for rater in range(rng.randint(2, 3)):
                tags.append((f"r{rater}", synset, rng.randint(10, 140) / 1000))
        plan.append((f"im{i:03d}", tags))

    def build(scale):
        c = Corpus()
        for image_id, tags in plan:
            add_image(c, image_id, "", "kw", EmotionRating(5.0, 5.0, 5.0))
            for rater, synset, w in tags:
                annotate(c, image_id,
                         TagAssignment(rater, Sense(synset, t.synsets[synset].lemmas[0]),
                                       w * scale), t)
        return c

    base = build(1.0)
    queries = [" ".join(rng.sample(lemmas, rng.randint(1, 2))) for _ in range(30)]
    simfn = DirectSimilarity(t, 6)
    base_orders = [
        [r.image_id for r in search(base, parse_query(t, qt, d_max=6), simfn)]
        for qt in queries
    ]
    for lam in (0.1, 2.0, 7.0):
        scaled = build(lam)
        for qt, expected in zip(queries, base_orders):
            got = [r.image_id for r in search(scaled, parse_query(t, qt, d_max=6), simfn)]
            assert got == expected, f"order changed under weight scale {lam}"


@pytest.mark.criterion("kappa")
def test_kappa_perfect_and_oracle():
    rng = random.Random(808)
    t = oracles.random_taxonomy(rng, 12)

    # perfect agreement: every rater gives identical weights -> exactly 1.0
    c = Corpus()
    add_image(c, "im1", "", "kw", EmotionRating(5.0, 5.0, 5.0))
    for rater in ("r1", "r2", "r3"):
        for synset, w in (("n-1", 0.9), ("n-2", 0.5), ("n-3", 0.2)):
            annotate(c, "im1",
                     TagAssignment(rater, Sense(synset, t.synsets[synset].lemmas[0]), w), t)
    assert agreement_kappa(c, "im1").kappa == 1.0

    # mixed fixture: the worked 2-rater example is exactly -1/11
    fixture = load_corpus(FIXTURES / "corpus.jsonl")
    assert agreement_kappa(fixture, "2510").kappa == pytest.approx(-1 / 11, abs=1e-12)

    # random mixed records against the from-definition oracle
    for _ in range(25):
        rc = oracles.random_corpus(rng, t, 1, max_tags=5, max_raters=5)
        image_id = sorted(rc.images)[0]
        record = rc.images[image_id]
        if len(record.annotators) < 2:
            continue
        got = agreement_kappa(rc, image_id).kappa
        assert got == pytest.approx(oracles.kappa_for_image(record), abs=1e-12)


@pytest.mark.criterion("protocol-reproduction")
def test_protocol_reproduction_at_desk_scale(tmp_path):
    p = SyntheticParams(n_synsets=956, n_images=100, seed=0)
    taxonomy, corpus, judge = generate_synthetic(p)
    stats = tag_count_stats(corpus)
    assert len(taxonomy.synsets) == 956
    assert stats.n_images == 100
    assert stats.median == 20 and stats.min == 13 and stats.max == 28

    queries = select_query_terms(taxonomy, corpus, n=40, d=30, seed=0)
    assert len(queries) == 40
    judgments = judge.judgments_for(queries, corpus)
    report = run_batch(corpus, queries, judgments,
                       BatchParams(taxonomy=taxonomy, d_max=30))
    assert not report.failures
    assert len(report.per_query) == 40
    assert all(not e.unjudged for e in report.per_query)

    # oracle pass: fresh BFS distances, brute-force ranking, metrics from
    # their definitions; every pipeline value must match exactly
    adj = oracles.adjacency(taxonomy)
    oracle_evals = []
    for text in queries:
        q = parse_query(taxonomy, text, d_max=30)
        ranking = oracles.brute_force_search(taxonomy, corpus, q.synsets, 30)
        ids = [row[0] for row in ranking]
        dist = {qs: oracles.bfs_distances_from(adj, qs) for qs in set(q.synsets)}
        relevant = {
            record.id: any(
                qs_d.get(tag.sense.synset, 10 ** 9) <= judge.radius
                for qs_d in dist.values()
                for tag in record.weighted_tags
            )
            for record in corpus.records()
        }
        hits = 0
        precisions = []
        tps = []
        for k, image_id in enumerate(ids, start=1):
            if relevant[image_id]:
                hits += 1
            precisions.append(hits / k)
            tps.append(hits)
        oracle_evals.append((ids, precisions, tps, hits))

    for e, (ids, precisions, tps, hits) in zip(report.per_query, oracle_evals):
        assert list(e.result_ids) == ids
        assert list(e.precision_at_k) == precisions
        assert list(e.tp_at_k) == tps
        assert e.tp_count == hits

    agg = report.aggregate
    max_tp = max(h for *_, h in oracle_evals)
    assert agg.max_tp == max_tp
    assert agg.avg_precision == \
        sum(sum(p) / len(p) if p else 0.0 for _, p, _, _ in oracle_evals) / 40
    assert agg.avg_tp == sum(h for *_, h in oracle_evals) / 40
    max_len = max(len(ids) for ids, *_ in oracle_evals)
    assert len(agg.precision_at_rank) == max_len
    for k in range(1, max_len + 1):
        at_k = [(p, tp) for ids, p, tp, _ in oracle_evals if len(ids) >= k]
        assert agg.precision_at_rank[k - 1] == sum(p[k - 1] for p, _ in at_k) / len(at_k)
        assert agg.tp_at_rank[k - 1] == sum(tp[k - 1] for _, tp in at_k) / len(at_k)
        assert agg.tp_normalized_at_rank[k - 1] == \
            sum(tp[k - 1] / max_tp for _, tp in at_k) / len(at_k)

    # aggregates are frozen as goldens; they are shape anchors only and are
    # deliberately not compared with any human-judged headline figure
    out = tmp_path / "protocol_curves.csv"
    emit_curves(report, out)
    assert out.read_text() == (GOLDEN / "protocol_curves.csv").read_text()
    summary = json.loads((GOLDEN / "protocol_summary.json").read_text())
    assert summary["queries"] == 40
    assert agg.avg_precision == summary["avg_precision"]
    assert agg.avg_tp == summary["avg_tp"]
    assert agg.max_tp == summary["max_tp"]
    assert max_len == summary["ranks"]


@pytest.mark.criterion("persistence-round-trips")
def test_persistence_round_trips(tmp_path, fixture_taxonomy):
    rng = random.Random(707)
    t = oracles.random_taxonomy(rng, 60)

    for tax in (fixture_taxonomy, t):
        path = tmp_path / "t.tax"
        save_taxonomy(tax, path)
        again = load_taxonomy(path)
        assert dump_taxonomy(again) == dump_taxonomy(tax)
        assert again.digest() == tax.digest()

    table = build_table(t, 6)
    table_path = tmp_path / "sim.tsv"
    save_table(table, table_path)
    loaded = load_table(table_path)
    assert loaded.entries == table.entries
    assert loaded.d_max == table.d_max
    assert loaded.taxonomy_digest == table.taxonomy_digest

    c = oracles.random_corpus(rng, t, 12)
    corpus_path = tmp_path / "c.jsonl"
    save_corpus(c, corpus_path)
    assert load_corpus(corpus_path) == c

    # a table built for a different taxonomy refuses to serve
    with pytest.raises(StaleTableError):
        verify_table(table, fixture_taxonomy)
    tax_path = tmp_path / "fixture.tax"
    save_taxonomy(fixture_taxonomy, tax_path)
    with pytest.raises(StaleTableError):
        Engine.open(EngineConfig(taxonomy_path=tax_path, corpus_path=corpus_path,
                                 table_path=table_path))
