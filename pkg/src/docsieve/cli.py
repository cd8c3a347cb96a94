"""Command-line interface: the pipeline as composable subcommands.

Exit codes: 0 ok, 2 query syntax error, 3 semantic error, 4 runtime error,
64 usage error. All randomness flows from --seed; reproducible runs write
byte-identical artifacts for identical inputs and configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from . import STORE_FORMAT_VERSION, __version__
from .annotate.runner import AnnotationBatch, run_annotation
from .clustering import cluster_corpus, clustering_to_json, default_k
from .corpus import load_corpus, save_corpus
from .errors import (
    DocsieveError,
    NoFeasibleSchema,
    QuerySemanticError,
    QuerySyntaxError,
    StoreTypeError,
    UnknownColumn,
    UnknownField,
    UnknownTempTable,
)
from .evaluation import cohesion, completion, schema_f1, tuple_prf
from .pipeline import (
    PipelineConfig,
    annotate_and_index,
    bench_pipeline,
    induce_schema,
)
from .query.binder import bind_nl_query
from .query.executor import LatencyProfile, ResultTable, run_statement
from .query.parser import parse_script
from .schema import schema_parse, schema_serialize
from .store import build_store, open_store, persist, store_dir_hash
from .synthetic import generate_corpus

EXIT_OK = 0
EXIT_SYNTAX = 2
EXIT_SEMANTIC = 3
EXIT_RUNTIME = 4
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse default exits 2; we reserve 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load_config(path: str | None, overrides: dict) -> PipelineConfig:
    obj: dict = {}
    if path:
        with open(path, "rb") as fh:
            obj = tomllib.load(fh)
    obj.update({k: v for k, v in overrides.items() if v is not None})
    return PipelineConfig.from_dict(obj)


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _print_table(table: ResultTable, fmt: str, out=None) -> None:
    out = out if out is not None else sys.stdout
    if fmt == "json":
        for row in table.to_json_rows():
            out.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow(["" if cell is None else cell for cell in row])


# --- subcommand implementations ----------------------------------------------


def cmd_ingest(args) -> int:
    corpus = load_corpus(args.corpus)
    total_tokens = sum(d.token_count for d in corpus)
    print(f"{len(corpus)} documents, {total_tokens} tokens, fingerprint {corpus.fingerprint()[:12]}")
    return EXIT_OK


def cmd_cluster(args) -> int:
    corpus = load_corpus(args.corpus)
    k = args.k if args.k else default_k(len(corpus))
    clustering = cluster_corpus(corpus, k=k, seed=args.seed)
    payload = clustering_to_json(clustering)
    if args.out:
        _write_json(Path(args.out), payload)
    sizes = clustering.sizes()
    print(f"k={clustering.k} inertia={clustering.inertia:.4f} sizes={sizes}")
    return EXIT_OK


def cmd_induce(args) -> int:
    corpus = load_corpus(args.corpus)
    config = _load_config(args.config, {"seed": args.seed, "k": args.k})
    if args.weights:
        a, b, g, d = (float(x) for x in args.weights.split(","))
        from .induce.quality import QualityWeights

        config.weights = QualityWeights(alpha=a, beta=b, gamma=g, delta=d)
    result = induce_schema(corpus, config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "schema.json").write_text(
        schema_serialize(result.schema), encoding="utf-8"
    )
    front_payload = [
        {
            "schema": json.loads(schema_serialize(e.schema)),
            "objectives": list(e.objectives),
            "quality_report": e.report.to_json(),
        }
        for e in result.front.entries
    ]
    _write_json(out_dir / "front.json", front_payload)
    _write_json(out_dir / "quality_report.json", result.report.to_json())
    r = result.report
    print(f"selected schema {result.schema.schema_id} with {len(result.schema.fields)} fields:")
    for f in result.schema.fields:
        print(f"  {f.name:24s} {f.value_type:12s} {f.tier}")
    print(
        f"Q={r.q:.4f} (cov={r.cov:.3f} disc={r.disc:.3f} cons={r.cons:.3f} match={r.match:.3f})"
    )
    print(f"t_annot={r.t_annot_mean_seconds * 1e3:.2f} ms/doc size_ratio={r.store_size_ratio:.4f}")
    return EXIT_OK


def cmd_annotate(args) -> int:
    corpus = load_corpus(args.corpus)
    schema = schema_parse(Path(args.schema).read_text(encoding="utf-8"))
    config = _load_config(args.config, {"seed": args.seed, "parallelism": args.jobs})
    batch = run_annotation(
        corpus, schema, config.registry(), parallelism=config.parallelism
    )
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(batch.to_jsonl(), encoding="utf-8")
    non_null = sum(
        1 for rec in batch.records for v in rec.values.values() if v
    )
    print(f"annotated {len(batch.records)} documents, {non_null} populated cells")
    if batch.failures:
        print(f"{len(batch.failures)} failures", file=sys.stderr)
    return EXIT_OK


def cmd_index(args) -> int:
    corpus = load_corpus(args.corpus)
    schema = schema_parse(Path(args.schema).read_text(encoding="utf-8"))
    batch = AnnotationBatch.from_jsonl(Path(args.batch).read_text(encoding="utf-8"))
    config = _load_config(args.config, {})
    built_at = "1970-01-01T00:00:00Z" if config.reproducible else None
    store = build_store(batch, schema, corpus, built_at=built_at)
    persist(store, args.store_dir)
    print(
        f"store written to {args.store_dir}: {len(store)} docs, "
        f"{store.size_bytes()} data bytes, hash {store_dir_hash(args.store_dir)[:12]}"
    )
    return EXIT_OK


def _run_query_text(store, text: str, fmt: str, explain: bool, profile: bool) -> int:
    statements = parse_script(text)
    temp_tables: dict = {}
    table = None
    profiles: list[LatencyProfile] = []
    for statement in statements:
        table, prof, the_plan = run_statement(statement, store, temp_tables)
        profiles.append(prof)
        if explain:
            print(the_plan.explain(), file=sys.stderr)
    assert table is not None
    _print_table(table, fmt)
    if profile:
        merged = {
            "l_index_seconds": sum(p.l_index_seconds for p in profiles),
            "candidate_count": sum(p.candidate_count for p in profiles),
            "extract_invocations": sum(p.extract_invocations for p in profiles),
            "l_extract_total_seconds": sum(p.l_extract_total_seconds for p in profiles),
            "total_seconds": sum(p.total_seconds for p in profiles),
        }
        print(json.dumps(merged, sort_keys=True), file=sys.stderr)
    return EXIT_OK


def cmd_query(args) -> int:
    store = open_store(args.store)
    return _run_query_text(store, args.query, args.format, args.explain, args.profile)


def cmd_script(args) -> int:
    store = open_store(args.store)
    if args.file:
        text = Path(args.file).read_text(encoding="utf-8")
    else:
        text = args.query
    return _run_query_text(store, text, args.format, args.explain, args.profile)


def cmd_bind_nl(args) -> int:
    if args.store:
        schema = open_store(args.store).schema
    else:
        schema = schema_parse(Path(args.schema).read_text(encoding="utf-8"))
    draft, report = bind_nl_query(args.text, schema)
    print(draft.display())
    print(json.dumps(report.to_json(), sort_keys=True, indent=2), file=sys.stderr)
    return EXIT_OK


def cmd_eval(args) -> int:
    store = open_store(args.store)
    gold = json.loads(Path(args.queries).read_text(encoding="utf-8"))
    from .evaluation import EvalReport, PRF, QueryEval

    report = EvalReport()
    parsed = []
    for entry in gold:
        qid = entry.get("query_id", "?")
        if "rows" not in entry or "columns" not in entry:
            report.warnings.append(f"{qid}: missing gold, skipped")
            continue
        try:
            statements = parse_script(entry["text"])
            parsed.extend(s.select for s in statements)
            parsed.extend(sub for s in statements for _n, sub in s.withs)
            temp_tables: dict = {}
            table = None
            profs = []
            for statement in statements:
                table, prof, _ = run_statement(statement, store, temp_tables)
                profs.append(prof)
            prf = tuple_prf(table, entry["columns"], [tuple(r) for r in entry["rows"]])
            report.per_query.append(
                QueryEval(
                    query_id=qid,
                    prf=prf,
                    structural_profile={
                        "candidate_count": sum(p.candidate_count for p in profs),
                        "extract_invocations": sum(p.extract_invocations for p in profs),
                    },
                )
            )
        except DocsieveError as exc:
            report.per_query.append(
                QueryEval(qid, PRF(0.0, 0.0, 0.0, ["error"]), error=str(exc))
            )
    report.finalize_macro()
    if args.gold_schema:
        gold_schema = json.loads(Path(args.gold_schema).read_text(encoding="utf-8"))
        report.schema_f1 = schema_f1(
            store.schema, [(g["name"], g["description"]) for g in gold_schema]
        )
    report.cohesion, _ = cohesion(store.schema)
    report.completion, _ = completion(store.schema, parsed)
    if args.report:
        _write_json(Path(args.report), report.to_json())
    print(
        f"macro P/R/F1 = {report.macro_precision:.4f}/{report.macro_recall:.4f}/"
        f"{report.macro_f1:.4f} over {len(report.per_query)} queries"
    )
    for q in report.per_query:
        marker = "ok " if q.prf.f1 == 1.0 else "FAIL"
        print(f"  [{marker}] {q.query_id}: f1={q.prf.f1:.4f}" + (f" ({q.error})" if q.error else ""))
    return EXIT_OK


def cmd_gen_demo(args) -> int:
    generated = generate_corpus(n_docs=args.docs, seed=args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_corpus(generated.corpus, out / "corpus.jsonl")
    _write_json(
        out / "queries.json",
        [
            {
                "query_id": q.query_id,
                "text": q.text,
                "nl_hint": q.nl_hint,
                "history": q.history,
                "columns": q.columns,
                "rows": [list(r) for r in q.rows],
            }
            for q in generated.queries
        ],
    )
    _write_json(
        out / "gold_schema.json",
        [{"name": n, "description": d} for n, d in generated.gold_schema],
    )
    _write_json(out / "gold_fields.json", generated.gold_fields)
    config_lines = [
        "# docsieve demo configuration",
        f"seed = {args.seed}",
        "k = 2",
        "theta_cov = 0.6",
        "scalarization = [0.95, 0.025, 0.025]",
        "query_history = [",
    ]
    config_lines += [f"    {json.dumps(q.history)}," for q in generated.queries]
    config_lines += [
        "]",
        "",
        "[weights]",
        "alpha = 0.25",
        "beta = 0.1",
        "gamma = 0.15",
        "delta = 0.5",
        "",
    ]
    (out / "config.toml").write_text("\n".join(config_lines), encoding="utf-8")
    print(f"demo corpus ({len(generated.corpus)} docs), gold files and config in {out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    generated = generate_corpus(n_docs=args.docs, seed=args.seed)
    config = _bench_config(args.seed, [q.history for q in generated.queries])
    report, timings, schema, store = bench_pipeline(generated, config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "schema.json").write_text(schema_serialize(schema), encoding="utf-8")
    persist(store, out / "store")
    _write_json(out / "eval_report.json", report.to_json())
    _write_json(out / "timings.json", timings)
    print(
        f"bench: macro F1 {report.macro_f1:.4f}, schema F1 {report.schema_f1:.4f}, "
        f"completion {report.completion:.2f}, {timings['total_seconds']:.1f}s"
    )
    return EXIT_OK if report.macro_f1 >= 0.95 else EXIT_RUNTIME


def _bench_config(seed: int, history: list[str]) -> PipelineConfig:
    from .induce.quality import QualityWeights

    return PipelineConfig(
        seed=seed,
        k=2,
        theta_cov=0.6,
        weights=QualityWeights(alpha=0.25, beta=0.1, gamma=0.15, delta=0.5),
        scalarization=(0.95, 0.025, 0.025),
        query_history=history,
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="docsieve", description=__doc__)
    parser.add_argument(
        "--version",
        action="version",
        version=f"docsieve {__version__} (store format v{STORE_FORMAT_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and summarize a JSONL corpus")
    p.add_argument("--corpus", required=True)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("cluster", help="k-means over document embeddings")
    p.add_argument("--corpus", required=True)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_cluster)

    p = sub.add_parser("induce", help="induce and select the working schema")
    p.add_argument("--corpus", required=True)
    p.add_argument("--config")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--weights", help="alpha,beta,gamma,delta")
    p.set_defaults(fn=cmd_induce)

    p = sub.add_parser("annotate", help="annotate a corpus against a schema")
    p.add_argument("--corpus", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.set_defaults(fn=cmd_annotate)

    p = sub.add_parser("index", help="materialize an annotation batch as a store")
    p.add_argument("--corpus", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--batch", required=True)
    p.add_argument("--store-dir", required=True)
    p.add_argument("--config")
    p.set_defaults(fn=cmd_index)

    p = sub.add_parser("query", help="run one query against a store")
    p.add_argument("--store", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--explain", action="store_true")
    p.add_argument("--profile", action="store_true")
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("script", help="run a multi-statement script")
    p.add_argument("--store", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--file")
    group.add_argument("--query")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--explain", action="store_true")
    p.add_argument("--profile", action="store_true")
    p.set_defaults(fn=cmd_script)

    p = sub.add_parser("bind-nl", help="draft a query from natural language")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--store")
    group.add_argument("--schema")
    p.add_argument("--text", required=True)
    p.set_defaults(fn=cmd_bind_nl)

    p = sub.add_parser("eval", help="evaluate a store against gold queries")
    p.add_argument("--store", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--gold-schema")
    p.add_argument("--report")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("gen-demo", help="write the planted demo corpus + gold files")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--docs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_gen_demo)

    p = sub.add_parser("bench", help="generate, run the full pipeline, evaluate")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--docs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except QuerySyntaxError as exc:
        print(f"syntax error: {exc}", file=sys.stderr)
        return EXIT_SYNTAX
    except (
        QuerySemanticError,
        UnknownField,
        UnknownColumn,
        UnknownTempTable,
        StoreTypeError,
    ) as exc:
        print(f"semantic error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    except NoFeasibleSchema as exc:
        print(f"no feasible schema: {exc}", file=sys.stderr)
        for name, count in sorted(exc.breakdown.items()):
            print(f"  violated {name}: {count} genomes", file=sys.stderr)
        return EXIT_RUNTIME
    except DocsieveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
