"""End-to-end orchestration: cluster -> induce -> annotate -> index -> query.

This is the composite the CLI exposes. All randomness flows from one seed;
a reproducible run (the default) stamps a fixed manifest time so two runs
over the same corpus produce byte-identical artifacts. Wall-clock timings
are collected separately from the deterministic report so the report file
itself is reproducible.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

from .annotate.extractors import ExtractorRegistry, consistency_ensemble
from .annotate.runner import AnnotationBatch, run_annotation
from .clustering import Clustering, cluster_corpus, default_k
from .corpus import Corpus, Document
from .embedding import EmbeddingCache
from .errors import ColumnMismatch, DocsieveError
from .evaluation import EvalReport, QueryEval, PRF, cohesion, completion, schema_f1, tuple_prf
from .induce.candidates import build_candidate_schemas
from .induce.mining import DEFAULT_MIN_SUPPORT, mine_cluster
from .induce.nsga import (
    FitnessContext,
    OptimizationParams,
    ParetoFront,
    nsga2_optimize,
    select_schema,
)
from .induce.quality import (
    DEFAULT_THETA_COV,
    QualityReport,
    QualityWeights,
    estimate_costs,
    estimated_annotation_seconds,
    eval_consistency,
    eval_coverage,
    eval_discriminativeness,
    eval_match,
)
from .query.executor import run_statement
from .query.parser import parse_script
from .schema import FeasibilityLimits, Schema
from .store import AnnotationStore, build_store
from .synthetic import GeneratedCorpus

REPRODUCIBLE_BUILT_AT = "1970-01-01T00:00:00Z"


@dataclass
class PipelineConfig:
    seed: int = 0
    dims: int = 256
    k: int | None = None  # cluster count; None = heuristic
    min_support: float = DEFAULT_MIN_SUPPORT
    sample_cap: int = 50
    fitness_sample: int = 24
    theta_cov: float = DEFAULT_THETA_COV
    weights: QualityWeights = field(default_factory=QualityWeights)
    limits: FeasibilityLimits = field(default_factory=FeasibilityLimits)
    ga: OptimizationParams = field(default_factory=OptimizationParams)
    scalarization: tuple[float, float, float] = (0.6, 0.2, 0.2)
    query_history: list[str] = field(default_factory=list)
    day_first: bool = True
    parallelism: int = field(default_factory=lambda: os.cpu_count() or 1)
    reproducible: bool = True

    def registry(self) -> ExtractorRegistry:
        return ExtractorRegistry(day_first=self.day_first)

    @staticmethod
    def from_dict(obj: dict) -> "PipelineConfig":
        cfg = PipelineConfig()
        simple = {
            "seed", "dims", "k", "min_support", "sample_cap", "fitness_sample",
            "theta_cov", "day_first", "parallelism", "reproducible",
        }
        for key in simple:
            if key in obj:
                setattr(cfg, key, obj[key])
        if "weights" in obj:
            w = obj["weights"]
            cfg.weights = QualityWeights(
                alpha=w.get("alpha", 0.25), beta=w.get("beta", 0.25),
                gamma=w.get("gamma", 0.25), delta=w.get("delta", 0.25),
            )
        if "limits" in obj:
            lim = obj["limits"]
            cfg.limits = FeasibilityLimits(
                max_depth=lim.get("max_depth", 4),
                max_branching=lim.get("max_branching", 8),
                t_max_seconds=lim.get("t_max_seconds", 120.0),
                storage_ratio_rho=lim.get("storage_ratio_rho", 0.3),
            )
        if "ga" in obj:
            ga = obj["ga"]
            cfg.ga = OptimizationParams(
                pop_size=ga.get("pop_size", 32),
                generations=ga.get("generations", 25),
                crossover_rate=ga.get("crossover_rate", 0.9),
                mutation_rate=ga.get("mutation_rate", 0.15),
                rng_seed=ga.get("rng_seed", cfg.seed),
            )
        else:
            cfg.ga = OptimizationParams(rng_seed=cfg.seed)
        if "scalarization" in obj:
            s = obj["scalarization"]
            cfg.scalarization = (float(s[0]), float(s[1]), float(s[2]))
        if "query_history" in obj:
            cfg.query_history = [str(q) for q in obj["query_history"]]
        return cfg


@dataclass
class InduceResult:
    schema: Schema
    front: ParetoFront
    clustering: Clustering
    report: QualityReport
    sample: list[Document]


def _stratified_sample(corpus: Corpus, clustering: Clustering, cap: int) -> list[Document]:
    """Round-robin over clusters so the sample represents every cluster."""
    buckets: dict[int, list[str]] = {}
    for doc_id in corpus.doc_ids:
        buckets.setdefault(clustering.assignments[doc_id], []).append(doc_id)
    ordered: list[str] = []
    pools = [buckets[c] for c in sorted(buckets)]
    i = 0
    while len(ordered) < min(cap, len(corpus)):
        added = False
        for pool in pools:
            if i < len(pool):
                ordered.append(pool[i])
                added = True
                if len(ordered) >= min(cap, len(corpus)):
                    break
        if not added:
            break
        i += 1
    return [corpus.get(d) for d in ordered]


def induce_schema(corpus: Corpus, config: PipelineConfig) -> InduceResult:
    """Cluster, mine per cluster, optimize, and select the working schema."""
    k = config.k if config.k is not None else default_k(len(corpus))
    k = min(k, len(corpus))
    clustering = cluster_corpus(corpus, k=k, seed=config.seed, dims=config.dims)

    pools = []
    by_cluster: dict[int, list[Document]] = {}
    for doc in corpus:
        by_cluster.setdefault(clustering.assignments[doc.doc_id], []).append(doc)
    for cluster_no in sorted(by_cluster):
        pools.append(
            mine_cluster(
                by_cluster[cluster_no],
                sample_cap=config.sample_cap,
                min_support=config.min_support,
            )
        )
    embeddings = EmbeddingCache(dims=config.dims)
    candidates = build_candidate_schemas(pools, embeddings)

    sample = _stratified_sample(corpus, clustering, config.fitness_sample)
    merged_pool = _merged_pool(pools, embeddings)
    context = FitnessContext(
        sample=sample,
        clustering=clustering,
        query_history=list(config.query_history),
        registry=config.registry(),
        ensemble=consistency_ensemble(config.day_first),
        theta_cov=config.theta_cov,
        embeddings=embeddings,
    )
    front = nsga2_optimize(
        merged_pool, candidates, config.ga, config.limits, config.weights, context
    )
    schema = select_schema(front, config.scalarization)
    report = final_quality_report(schema, config, context, sample)
    return InduceResult(
        schema=schema, front=front, clustering=clustering, report=report, sample=sample
    )


def _merged_pool(pools, embeddings):
    from .induce.candidates import merge_pools

    return merge_pools(pools, embeddings)


def final_quality_report(
    schema: Schema,
    config: PipelineConfig,
    context: FitnessContext,
    sample: list[Document],
) -> QualityReport:
    """Selected-schema report with measured (wall-clock) annotation cost."""
    registry = config.registry()
    cov = eval_coverage(schema, sample, registry, theta_cov=config.theta_cov)
    if schema.tier_fields("sem"):
        from .annotate.runner import annotate_document, resolve_extractors

        extractors = resolve_extractors(schema, registry)
        annotations = {
            d.doc_id: annotate_document(d, schema, registry, extractors) for d in sample
        }
        disc, _ = eval_discriminativeness(schema, context.clustering, annotations)
    else:
        disc = 0.0
    cons, _ = eval_consistency(schema, sample, context.ensemble)
    match, _ = eval_match(schema, config.query_history, context.embeddings)
    w = config.weights
    q = w.alpha * cov + w.beta * disc + w.gamma * cons + w.delta * match
    t_wall, ratio = estimate_costs(schema, sample, registry)
    return QualityReport(
        cov=cov, disc=disc, cons=cons, match=match, q=q,
        t_annot_mean_seconds=t_wall,
        store_size_ratio=ratio,
        t_estimate_seconds=estimated_annotation_seconds(schema, sample),
    )


def annotate_and_index(
    corpus: Corpus, schema: Schema, config: PipelineConfig
) -> tuple[AnnotationBatch, AnnotationStore]:
    batch = run_annotation(
        corpus, schema, config.registry(), parallelism=config.parallelism
    )
    built_at = REPRODUCIBLE_BUILT_AT if config.reproducible else None
    store = build_store(batch, schema, corpus, built_at=built_at)
    return batch, store


def bench_pipeline(
    generated: GeneratedCorpus,
    config: PipelineConfig,
) -> tuple[EvalReport, dict, Schema, AnnotationStore]:
    """Full pipeline over a planted corpus; returns (report, timings, schema, store).

    The EvalReport is deterministic under a fixed config+seed; measured
    wall-clock aggregates live in the separate timings dict.
    """
    timings: dict[str, float] = {}
    started = time.perf_counter()
    induced = induce_schema(generated.corpus, config)
    timings["induce_seconds"] = time.perf_counter() - started

    stage_start = time.perf_counter()
    _batch, store = annotate_and_index(generated.corpus, induced.schema, config)
    timings["annotate_index_seconds"] = time.perf_counter() - stage_start

    report = EvalReport()
    embeddings = EmbeddingCache(dims=config.dims)
    parsed_statements = []
    total_candidates = 0
    total_invocations = 0
    query_wall = 0.0
    for gold in generated.queries:
        try:
            statements = parse_script(gold.text)
        except DocsieveError as exc:
            report.per_query.append(
                QueryEval(
                    query_id=gold.query_id,
                    prf=PRF(0.0, 0.0, 0.0, ["parse_error"]),
                    error=str(exc),
                )
            )
            continue
        parsed_statements.extend(s.select for s in statements)
        parsed_statements.extend(sub for s in statements for _n, sub in s.withs)
        if not gold.rows and not gold.columns:
            report.warnings.append(f"{gold.query_id}: missing gold, skipped")
            continue
        stage_start = time.perf_counter()
        try:
            temp_tables: dict = {}
            table = None
            profiles = []
            for statement in statements:
                table, profile, _plan = run_statement(statement, store, temp_tables)
                profiles.append(profile)
            assert table is not None
            prf = tuple_prf(table, gold.columns, gold.rows)
            structural = {
                "candidate_count": sum(p.candidate_count for p in profiles),
                "extract_invocations": sum(p.extract_invocations for p in profiles),
            }
            total_candidates += structural["candidate_count"]
            total_invocations += structural["extract_invocations"]
            report.per_query.append(
                QueryEval(
                    query_id=gold.query_id, prf=prf, structural_profile=structural
                )
            )
        except (DocsieveError, ColumnMismatch) as exc:
            report.per_query.append(
                QueryEval(
                    query_id=gold.query_id,
                    prf=PRF(0.0, 0.0, 0.0, ["execution_error"]),
                    error=str(exc),
                )
            )
        query_wall += time.perf_counter() - stage_start
    timings["query_seconds"] = query_wall
    timings["total_seconds"] = time.perf_counter() - started

    report.finalize_macro()
    report.schema_f1 = schema_f1(induced.schema, generated.gold_schema, embeddings)
    report.cohesion, _ = cohesion(induced.schema, embeddings)
    report.completion, _ = completion(induced.schema, parsed_statements)
    report.latency = {
        "total_candidate_count": total_candidates,
        "total_extract_invocations": total_invocations,
        "queries": len(generated.queries),
    }
    return report, timings, induced.schema, store
