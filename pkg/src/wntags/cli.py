"""Command line front end.

Each subcommand maps onto one library operation. Human-readable output
goes to stdout; pass --json for machine-readable output. Operational
errors print a single line to stderr and exit 1; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import evaluation, retrieval, service
from .corpus import EmotionRating, TagAssignment
from .errors import WntagsError
from .numfmt import fmt12, round_floats
from .relatedness import build_table, load_table, save_table
from .retrieval import DirectSimilarity, TableSimilarity
from .taxonomy import Sense, load_taxonomy, save_taxonomy


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        json.dump(round_floats(payload), sys.stdout, ensure_ascii=False)
        sys.stdout.write("\n")
    else:
        print(text)


def _sim_source(taxonomy, table_path, d_max):
    if table_path:
        table = load_table(table_path)
        return TableSimilarity(table, taxonomy, d_max)
    return DirectSimilarity(taxonomy, d_max)


def cmd_load_taxonomy(args) -> int:
    t = load_taxonomy(args.taxonomy)
    payload = {"synsets": len(t.synsets), "lemmas": len(t.lemma_index),
               "digest": t.digest()}
    _emit(args, payload,
          f"ok: {payload['synsets']} synsets, {payload['lemmas']} lemmas, "
          f"digest {payload['digest'][:16]}...")
    return 0


def cmd_build_sim(args) -> int:
    t = load_taxonomy(args.taxonomy)
    table = build_table(t, args.d_max)
    save_table(table, args.output)
    payload = {"entries": len(table.entries), "d_max": table.d_max,
               "digest": table.taxonomy_digest, "output": str(args.output)}
    _emit(args, payload,
          f"ok: {payload['entries']} entries (d_max={table.d_max}) -> {args.output}")
    return 0


def cmd_import(args) -> int:
    t = load_taxonomy(args.taxonomy)
    c = corpus_mod.load_corpus(args.corpus)
    corpus_mod.validate_corpus(c, t)
    out = Path(args.output) if args.output else Path(args.corpus)
    corpus_mod.save_corpus(c, out)
    publishable = len(c.records())
    payload = {"images": len(c.images), "publishable": publishable,
               "output": str(out)}
    _emit(args, payload,
          f"ok: {payload['images']} images ({publishable} publishable) -> {out}")
    return 0


def cmd_annotate(args) -> int:
    t = load_taxonomy(args.taxonomy)
    c = corpus_mod.load_corpus(args.corpus)
    assignment = TagAssignment(args.annotator, Sense(args.synset, args.lemma),
                               args.weight)
    record = corpus_mod.annotate(c, args.image_id, assignment, t)
    corpus_mod.append_record(args.corpus, record)
    payload = service.record_payload(record)
    _emit(args, payload,
          f"ok: image {record.id} now carries {len(record.weighted_tags)} weighted "
          f"tags from {len(record.annotators)} annotators "
          f"(publishable={str(record.publishable).lower()})")
    return 0


def _add_affect_args(p: argparse.ArgumentParser) -> None:
    for dim in ("val", "ar", "dom"):
        p.add_argument(f"--{dim}-min", type=float, default=None)
        p.add_argument(f"--{dim}-max", type=float, default=None)


def _affect_ranges(args):
    def rng(lo, hi):
        if lo is None and hi is None:
            return None
        return (1.0 if lo is None else lo, 9.0 if hi is None else hi)

    return {
        "val_range": rng(args.val_min, args.val_max),
        "ar_range": rng(args.ar_min, args.ar_max),
        "dom_range": rng(args.dom_min, args.dom_max),
    }


def cmd_search(args) -> int:
    t = load_taxonomy(args.taxonomy)
    c = corpus_mod.load_corpus(args.corpus)
    query = retrieval.parse_query(t, args.query, d_max=args.d_max)
    source = _sim_source(t, args.table, args.d_max)
    if args.adaptive:
        results, d_used = retrieval.adaptive_search(
            c, query, lambda d: _sim_source(t, args.table, d),
            d_start=args.d_start, d_step=args.d_step,
            min_results=args.min_results, d_ceiling=args.d_ceiling,
            include_drafts=args.include_drafts)
    else:
        results = retrieval.search(c, query, source, limit=None,
                                   include_drafts=args.include_drafts)
        d_used = args.d_max
    results = retrieval.filter_affect(results, c, **_affect_ranges(args))
    if args.limit is not None:
        results = results[: args.limit]

    if args.json:
        payload = {
            "query": {"raw_text": query.raw_text, "d_max": d_used,
                      "unmatched": list(query.unmatched_tokens)},
            "results": [
                {"image_id": r.image_id, "raw_score": r.raw_score,
                 "relevance": r.relevance,
                 "keyword": c.require(r.image_id).iaps_keyword}
                for r in results
            ],
        }
        _emit(args, payload, "")
        return 0
    if not results:
        print("no results")
        return 0
    print(f"{'rank':>4}  {'relevance':>14}  {'image':<12}  keyword")
    for rank, r in enumerate(results, start=1):
        keyword = c.require(r.image_id).iaps_keyword
        print(f"{rank:>4}  {fmt12(r.relevance):>14}  {r.image_id:<12}  {keyword}")
    return 0


def cmd_eval(args) -> int:
    t = load_taxonomy(args.taxonomy)
    c = corpus_mod.load_corpus(args.corpus)
    queries = [
        line.strip()
        for line in Path(args.queries).read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    judgments = evaluation.load_judgments(args.judgments)
    table = load_table(args.table) if args.table else None
    params = evaluation.BatchParams(taxonomy=t, d_max=args.d_max,
                                    limit=args.limit,
                                    include_drafts=args.include_drafts,
                                    table=table)
    report = evaluation.run_batch(c, queries, judgments, params)
    rows = evaluation.emit_curves(report, args.out)
    fig_path = None
    if not args.no_fig:
        fig_path = args.fig or str(Path(args.out).with_suffix(".png"))
        evaluation.render_curves(report, fig_path)

    agg = report.aggregate
    payload = {
        "queries": len(report.per_query),
        "failures": [{"query": q, "code": code, "message": msg}
                     for q, code, msg in report.failures],
        "avg_precision": agg.avg_precision,
        "avg_tp": agg.avg_tp,
        "max_tp": agg.max_tp,
        "curve_rows": rows,
        "out": str(args.out),
        "fig": fig_path,
    }
    text = (f"ok: {payload['queries']} queries, avg precision "
            f"{fmt12(agg.avg_precision)}, avg TP {fmt12(agg.avg_tp)}; "
            f"wrote {args.out} ({rows} ranks)")
    if fig_path:
        text += f" and {fig_path}"
    if report.failures:
        text += f"; {len(report.failures)} queries failed"
    _emit(args, payload, text)
    return 0


def cmd_gen_synthetic(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = evaluation.SyntheticParams(
        n_synsets=args.synsets, n_images=args.images, seed=args.seed,
        tag_median=args.tag_median, tag_min=args.tag_min, tag_max=args.tag_max,
        relevance_radius=args.radius)
    taxonomy, corpus, judge = evaluation.generate_synthetic(params)
    queries = evaluation.select_query_terms(taxonomy, corpus, n=args.queries,
                                            d=args.query_d, seed=args.seed)
    judgments = judge.judgments_for(queries, corpus)

    save_taxonomy(taxonomy, out_dir / "taxonomy.tax")
    corpus_mod.save_corpus(corpus, out_dir / "corpus.jsonl")
    (out_dir / "queries.txt").write_text("\n".join(queries) + "\n",
                                         encoding="utf-8")
    evaluation.save_judgments(judgments, out_dir / "judgments.csv")
    payload = {"out_dir": str(out_dir), "synsets": len(taxonomy.synsets),
               "images": len(corpus.images), "queries": len(queries),
               "judgments": len(judgments), "seed": args.seed}
    _emit(args, payload,
          f"ok: wrote taxonomy.tax, corpus.jsonl, queries.txt, judgments.csv "
          f"in {out_dir} (seed={args.seed})")
    return 0


def cmd_serve(args) -> int:
    if args.config:
        config = service.load_config(args.config)
    else:
        config = service.config_from_env()
    if args.listen:
        config.listen_address = args.listen
    service.serve(config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wntags",
                                     description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true",
                        help="machine-readable JSON output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("load-taxonomy", parents=[common],
                       help="parse and validate a taxonomy file")
    p.add_argument("taxonomy")
    p.set_defaults(func=cmd_load_taxonomy)

    p = sub.add_parser("build-sim", parents=[common], help="precompute the similarity table")
    p.add_argument("taxonomy")
    p.add_argument("--d-max", type=int, default=retrieval.DEFAULT_D_MAX)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_build_sim)

    p = sub.add_parser("import", parents=[common], help="validate a corpus file against a taxonomy")
    p.add_argument("taxonomy")
    p.add_argument("corpus")
    p.add_argument("-o", "--output", default=None,
                   help="write the compacted corpus here (default: in place)")
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("annotate", parents=[common], help="attach one weighted sense to an image")
    p.add_argument("image_id")
    p.add_argument("--taxonomy", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--annotator", required=True)
    p.add_argument("--synset", required=True)
    p.add_argument("--lemma", required=True)
    p.add_argument("--weight", type=float, required=True)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("search", parents=[common], help="ranked retrieval for a text query")
    p.add_argument("query")
    p.add_argument("--taxonomy", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--table", default=None)
    p.add_argument("--d-max", type=int, default=retrieval.DEFAULT_D_MAX)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--include-drafts", action="store_true")
    p.add_argument("--adaptive", action="store_true",
                   help="widen d until enough results accumulate")
    p.add_argument("--d-start", type=int, default=2)
    p.add_argument("--d-step", type=int, default=2)
    p.add_argument("--min-results", type=int, default=5)
    p.add_argument("--d-ceiling", type=int, default=30)
    _add_affect_args(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("eval", parents=[common], help="batch evaluation: curve CSV plus figure")
    p.add_argument("--taxonomy", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--queries", required=True, help="one query per line")
    p.add_argument("--judgments", required=True)
    p.add_argument("--out", required=True, help="curve CSV path")
    p.add_argument("--fig", default=None,
                   help="figure path (default: CSV path with .png)")
    p.add_argument("--no-fig", action="store_true")
    p.add_argument("--table", default=None)
    p.add_argument("--d-max", type=int, default=retrieval.DEFAULT_D_MAX)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--include-drafts", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gen-synthetic", parents=[common], help="emit a seeded synthetic dataset")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--synsets", type=int, default=956)
    p.add_argument("--images", type=int, default=100)
    p.add_argument("--queries", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tag-median", type=int, default=20)
    p.add_argument("--tag-min", type=int, default=13)
    p.add_argument("--tag-max", type=int, default=28)
    p.add_argument("--radius", type=int, default=3,
                   help="relevance radius for rule-based judgments")
    p.add_argument("--query-d", type=int, default=30,
                   help="select query terms within this node distance of a tag")
    p.set_defaults(func=cmd_gen_synthetic)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP/JSON service")
    p.add_argument("--config", default=None,
                   help=f"key=value config file (default: ${service.CONFIG_ENV_VAR})")
    p.add_argument("--listen", default=None, help="host:port override")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WntagsError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: IoError: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
