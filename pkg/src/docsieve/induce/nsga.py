"""Constrained multi-objective schema selection (NSGA-II).

Genomes are (inclusion mask, per-field tier gene, per-field group gene) over
the mined field pool. Objectives are maximized as [quality, -estimated
annotation seconds, -store size ratio]; constraint handling follows the
constrained-dominance rule (any feasible genome beats any infeasible one,
infeasible genomes compare on total violation). Every evaluated genome is
kept in an archive and the returned front is the non-dominated set of all
feasible evaluations, not just the final population.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from ..annotate.extractors import ExtractorRegistry, consistency_ensemble
from ..annotate.runner import annotate_document, resolve_extractors
from ..clustering import Clustering
from ..corpus import Document
from ..embedding import EmbeddingCache
from ..errors import EmptyPool, NoFeasibleSchema
from ..schema import (
    FAST_ALLOWED_TYPES,
    FeasibilityLimits,
    Schema,
    build_tier_hierarchy,
    validate_schema,
)
from .candidates import CandidateSet
from .mining import MinedField
from .quality import (
    DEFAULT_THETA_COV,
    QualityReport,
    QualityWeights,
    estimated_annotation_seconds,
    eval_consistency,
    eval_coverage,
    eval_discriminativeness,
    eval_match,
    store_size_ratio,
)

TIER_GENES = ("fast", "sem", "detail")
GROUP_GENE_MAX = 8


@dataclass(frozen=True)
class Genome:
    mask: tuple[bool, ...]
    tiers: tuple[str, ...]
    groups: tuple[int, ...]

    def key(self, pool: list[MinedField]) -> tuple:
        """Cache key over the decoded field set and effective tiers."""
        included = []
        for i, on in enumerate(self.mask):
            if on:
                included.append((pool[i].spec.name, _effective_tier(pool[i], self.tiers[i])))
        return tuple(sorted(included))


def _effective_tier(cand: MinedField, gene: str) -> str:
    if gene == "fast" and cand.spec.value_type not in FAST_ALLOWED_TYPES:
        return "sem"
    return gene


def decode(genome: Genome, pool: list[MinedField]) -> Schema:
    members = []
    group_keys = {}
    for i, on in enumerate(genome.mask):
        if not on:
            continue
        spec = pool[i].spec.with_tier(_effective_tier(pool[i], genome.tiers[i]))
        members.append(spec)
        group_keys[spec.name] = genome.groups[i]
    digest = hashlib.sha1(repr(genome.key(pool)).encode("utf-8")).hexdigest()[:8]
    return Schema(
        schema_id=f"evolved-{digest}",
        granularity_label="evolved",
        fields=tuple(members),
        hierarchy=build_tier_hierarchy(members, group_keys),
    )


def encode(schema: Schema, pool: list[MinedField]) -> Genome:
    by_name = schema.field_map()
    mask, tiers, groups = [], [], []
    for cand in pool:
        spec = by_name.get(cand.spec.name)
        mask.append(spec is not None)
        tiers.append(spec.tier if spec is not None else cand.spec.tier)
        groups.append(0)
    return Genome(mask=tuple(mask), tiers=tuple(tiers), groups=tuple(groups))


# --- dominance machinery -----------------------------------------------------


def dominates(a: tuple[float, ...], b: tuple[float, ...]) -> bool:
    """Pareto dominance under the maximization convention."""
    at_least = all(x >= y for x, y in zip(a, b))
    strictly = any(x > y for x, y in zip(a, b))
    return at_least and strictly


def non_dominated_sort(population: list[tuple[float, ...]]) -> list[list[int]]:
    """Fast non-dominated sort; returns fronts of population indices."""
    n = len(population)
    dominated_by: list[list[int]] = [[] for _ in range(n)]
    domination_count = [0] * n
    fronts: list[list[int]] = [[]]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if dominates(population[i], population[j]):
                dominated_by[i].append(j)
            elif dominates(population[j], population[i]):
                domination_count[i] += 1
        if domination_count[i] == 0:
            fronts[0].append(i)
    current = 0
    while fronts[current]:
        nxt: list[int] = []
        for i in fronts[current]:
            for j in dominated_by[i]:
                domination_count[j] -= 1
                if domination_count[j] == 0:
                    nxt.append(j)
        current += 1
        fronts.append(sorted(nxt))
    fronts.pop()
    return [sorted(f) for f in fronts]


def crowding_distance(front: list[tuple[float, ...]]) -> list[float]:
    """Per-member crowding distance; boundary members get +inf."""
    n = len(front)
    if n == 0:
        return []
    m = len(front[0])
    dist = [0.0] * n
    for obj in range(m):
        order = sorted(range(n), key=lambda i: front[i][obj])
        lo, hi = front[order[0]][obj], front[order[-1]][obj]
        dist[order[0]] = float("inf")
        dist[order[-1]] = float("inf")
        span = hi - lo
        if span <= 0:
            continue
        for rank in range(1, n - 1):
            i = order[rank]
            if dist[i] == float("inf"):
                continue
            gap = front[order[rank + 1]][obj] - front[order[rank - 1]][obj]
            dist[i] += gap / span
    return dist


# --- fitness -------------------------------------------------------------------


@dataclass
class FitnessContext:
    sample: list[Document]
    clustering: Clustering
    query_history: list[str] = field(default_factory=list)
    registry: ExtractorRegistry = field(default_factory=ExtractorRegistry)
    ensemble: list[ExtractorRegistry] | None = None
    theta_cov: float = DEFAULT_THETA_COV
    embeddings: EmbeddingCache = field(default_factory=EmbeddingCache)


@dataclass
class Evaluation:
    schema: Schema
    objectives: tuple[float, float, float]
    feasible: bool
    violation: float
    violated: list[str]
    report: QualityReport | None


@dataclass
class FrontEntry:
    schema: Schema
    objectives: tuple[float, float, float]
    report: QualityReport


@dataclass
class ParetoFront:
    entries: list[FrontEntry]

    def objective_vectors(self) -> list[tuple[float, float, float]]:
        return [e.objectives for e in self.entries]


@dataclass
class OptimizationParams:
    pop_size: int = 32
    generations: int = 25
    crossover_rate: float = 0.9
    mutation_rate: float = 0.2
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.pop_size < 4 or self.pop_size % 2 != 0:
            raise ValueError("pop_size must be even and >= 4")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")


def evaluate_genome(
    genome: Genome,
    pool: list[MinedField],
    limits: FeasibilityLimits,
    weights: QualityWeights,
    context: FitnessContext,
) -> Evaluation:
    schema = decode(genome, pool)
    if not any(genome.mask):
        return Evaluation(schema, (0.0, 0.0, 0.0), False, float("inf"), ["empty"], None)
    validation = validate_schema(schema)
    violated: list[str] = []
    violation = 0.0
    if not validation.ok:
        violated.extend(sorted(validation.codes()))
        violation += float(len(validation.violations))

    depth = schema.hierarchy.depth()
    branching = schema.hierarchy.branching_factor()
    if depth > limits.max_depth:
        violated.append("depth")
        violation += (depth - limits.max_depth) / limits.max_depth
    if branching > limits.max_branching:
        violated.append("branching")
        violation += (branching - limits.max_branching) / limits.max_branching

    extractors = resolve_extractors(schema, context.registry)
    annotations = {
        doc.doc_id: annotate_document(doc, schema, context.registry, extractors)
        for doc in context.sample
    }
    records = [annotations[doc.doc_id] for doc in context.sample]

    cov = eval_coverage(
        schema, context.sample, context.registry,
        theta_cov=context.theta_cov, annotations=records,
    )
    if schema.tier_fields("sem"):
        disc, _ = eval_discriminativeness(schema, context.clustering, annotations)
    else:
        disc = 0.0
    cons, _ = eval_consistency(
        schema, context.sample, context.ensemble or consistency_ensemble()
    )
    match, _ = eval_match(schema, context.query_history, context.embeddings)
    q = (
        weights.alpha * cov + weights.beta * disc
        + weights.gamma * cons + weights.delta * match
    )

    t_est = estimated_annotation_seconds(schema, context.sample)
    ratio = store_size_ratio(schema, context.sample, records)
    if t_est > limits.t_max_seconds:
        violated.append("t_annot")
        violation += (t_est - limits.t_max_seconds) / limits.t_max_seconds
    if ratio > limits.storage_ratio_rho:
        violated.append("storage_ratio")
        violation += (ratio - limits.storage_ratio_rho) / limits.storage_ratio_rho

    report = QualityReport(
        cov=cov, disc=disc, cons=cons, match=match, q=q,
        store_size_ratio=ratio, t_estimate_seconds=t_est,
    )
    return Evaluation(
        schema=schema,
        objectives=(q, -t_est, -ratio),
        feasible=not violated,
        violation=violation,
        violated=violated,
        report=report,
    )


# --- the optimizer --------------------------------------------------------------


def _random_genome(n: int, rng: random.Random) -> Genome:
    mask = [rng.random() < 0.5 for _ in range(n)]
    if not any(mask):
        mask[rng.randrange(n)] = True
    tiers = tuple(rng.choice(TIER_GENES) for _ in range(n))
    groups = tuple(rng.randrange(GROUP_GENE_MAX) for _ in range(n))
    return Genome(mask=tuple(mask), tiers=tiers, groups=groups)


def _crossover(a: Genome, b: Genome, rng: random.Random) -> Genome:
    n = len(a.mask)
    mask, tiers, groups = [], [], []
    for i in range(n):
        src = a if rng.random() < 0.5 else b
        mask.append(src.mask[i])
        tiers.append(src.tiers[i])
        groups.append(src.groups[i])
    if not any(mask):
        mask[rng.randrange(n)] = True
    return Genome(mask=tuple(mask), tiers=tuple(tiers), groups=tuple(groups))


def _mutate(g: Genome, rate: float, rng: random.Random) -> Genome:
    n = len(g.mask)
    mask = list(g.mask)
    tiers = list(g.tiers)
    groups = list(g.groups)
    for i in range(n):
        if rng.random() < rate:
            mask[i] = not mask[i]
        if rng.random() < rate:
            tiers[i] = rng.choice(TIER_GENES)
        if rng.random() < rate:
            groups[i] = rng.randrange(GROUP_GENE_MAX)
    if not any(mask):
        mask[rng.randrange(n)] = True
    return Genome(mask=tuple(mask), tiers=tuple(tiers), groups=tuple(groups))


def _better(
    i: int,
    j: int,
    evals: list[Evaluation],
    rank: dict[int, int],
    crowd: dict[int, float],
) -> int:
    a, b = evals[i], evals[j]
    if a.feasible != b.feasible:
        return i if a.feasible else j
    if not a.feasible:
        return i if a.violation <= b.violation else j
    if rank[i] != rank[j]:
        return i if rank[i] < rank[j] else j
    return i if crowd[i] >= crowd[j] else j


def _rank_population(evals: list[Evaluation]) -> tuple[dict[int, int], dict[int, float], list[list[int]]]:
    feasible_idx = [i for i, e in enumerate(evals) if e.feasible]
    infeasible_idx = [i for i, e in enumerate(evals) if not e.feasible]
    rank: dict[int, int] = {}
    crowd: dict[int, float] = {}
    ordered_fronts: list[list[int]] = []
    if feasible_idx:
        fronts = non_dominated_sort([evals[i].objectives for i in feasible_idx])
        for front_no, front in enumerate(fronts):
            members = [feasible_idx[i] for i in front]
            ordered_fronts.append(members)
            dists = crowding_distance([evals[i].objectives for i in members])
            for member, d in zip(members, dists):
                rank[member] = front_no
                crowd[member] = d
    if infeasible_idx:
        # Infeasible genomes rank below every feasible front, best violation first.
        by_violation = sorted(infeasible_idx, key=lambda i: evals[i].violation)
        base = len(ordered_fronts)
        for pos, i in enumerate(by_violation):
            rank[i] = base + pos
            crowd[i] = 0.0
            ordered_fronts.append([i])
    return rank, crowd, ordered_fronts


def nsga2_optimize(
    pool: list[MinedField],
    seeds: CandidateSet | None,
    params: OptimizationParams,
    limits: FeasibilityLimits,
    weights: QualityWeights,
    context: FitnessContext,
) -> ParetoFront:
    """Evolve schema genomes; return the archive-wide first feasible front."""
    if not pool:
        raise EmptyPool("field pool is empty")
    n = len(pool)
    rng = random.Random(params.rng_seed)

    archive: dict[tuple, Evaluation] = {}

    def fitness(genome: Genome) -> Evaluation:
        key = genome.key(pool)
        hit = archive.get(key)
        if hit is None:
            hit = evaluate_genome(genome, pool, limits, weights, context)
            archive[key] = hit
        return hit

    population: list[Genome] = []
    if seeds is not None:
        for schema in seeds.schemas():
            population.append(encode(schema, pool))
    while len(population) < params.pop_size:
        population.append(_random_genome(n, rng))
    population = population[: params.pop_size]

    evals = [fitness(g) for g in population]

    for _ in range(params.generations):
        rank, crowd, _ = _rank_population(evals)
        offspring: list[Genome] = []
        while len(offspring) < params.pop_size:
            c1, c2 = rng.randrange(len(population)), rng.randrange(len(population))
            p1 = population[_better(c1, c2, evals, rank, crowd)]
            c3, c4 = rng.randrange(len(population)), rng.randrange(len(population))
            p2 = population[_better(c3, c4, evals, rank, crowd)]
            child = _crossover(p1, p2, rng) if rng.random() < params.crossover_rate else p1
            offspring.append(_mutate(child, params.mutation_rate, rng))
        combined = population + offspring
        combined_evals = evals + [fitness(g) for g in offspring]
        rank, crowd, fronts = _rank_population(combined_evals)
        next_pop: list[int] = []
        for front in fronts:
            if len(next_pop) + len(front) <= params.pop_size:
                next_pop.extend(front)
            else:
                remaining = params.pop_size - len(next_pop)
                by_crowding = sorted(front, key=lambda i: -crowd[i])
                next_pop.extend(by_crowding[:remaining])
            if len(next_pop) >= params.pop_size:
                break
        population = [combined[i] for i in next_pop]
        evals = [combined_evals[i] for i in next_pop]

    feasible = [e for e in archive.values() if e.feasible]
    if not feasible:
        breakdown: dict[str, int] = {}
        for e in archive.values():
            for name in e.violated:
                breakdown[name] = breakdown.get(name, 0) + 1
        raise NoFeasibleSchema(breakdown)

    _polish_front(archive, pool, limits, weights, context, fitness)

    feasible = [e for e in archive.values() if e.feasible]
    fronts = non_dominated_sort([e.objectives for e in feasible])
    first = [feasible[i] for i in fronts[0]]
    first.sort(key=lambda e: (-e.objectives[0], e.schema.schema_id))
    entries = [
        FrontEntry(schema=e.schema, objectives=e.objectives, report=e.report)
        for e in first
        if e.report is not None
    ]
    return ParetoFront(entries=entries)


POLISH_TOP = 8
POLISH_ROUNDS = 2


def _genome_from_key(key: tuple, pool: list[MinedField]) -> Genome:
    wanted = dict(key)
    mask, tiers = [], []
    for cand in pool:
        tier = wanted.get(cand.spec.name)
        mask.append(tier is not None)
        tiers.append(tier if tier is not None else cand.spec.tier)
    return Genome(mask=tuple(mask), tiers=tuple(tiers), groups=(0,) * len(pool))


def _polish_front(archive, pool, limits, weights, context, fitness) -> None:
    """Local improvement around the best front members.

    The GA samples a tiny corner of the genotype space, so a front member
    can survive while a one-gene variant that dominates it was simply never
    visited. Evaluating every tier flip and single-field drop of the top-q
    front members closes that gap deterministically.
    """
    for _ in range(POLISH_ROUNDS):
        feasible = [(k, e) for k, e in archive.items() if e.feasible]
        fronts = non_dominated_sort([e.objectives for _k, e in feasible])
        first = [feasible[i] for i in fronts[0]]
        first.sort(key=lambda ke: -ke[1].objectives[0])
        fresh = 0
        for key, _entry in first[:POLISH_TOP]:
            genome = _genome_from_key(key, pool)
            for i, included in enumerate(genome.mask):
                if not included:
                    continue
                for tier in TIER_GENES:
                    if tier == genome.tiers[i]:
                        continue
                    flipped = Genome(
                        mask=genome.mask,
                        tiers=genome.tiers[:i] + (tier,) + genome.tiers[i + 1:],
                        groups=genome.groups,
                    )
                    if flipped.key(pool) not in archive:
                        fitness(flipped)
                        fresh += 1
                if sum(genome.mask) > 1:
                    dropped = Genome(
                        mask=genome.mask[:i] + (False,) + genome.mask[i + 1:],
                        tiers=genome.tiers,
                        groups=genome.groups,
                    )
                    if dropped.key(pool) not in archive:
                        fitness(dropped)
                        fresh += 1
        if fresh == 0:
            break


def select_schema(
    front: ParetoFront,
    scalarization: tuple[float, float, float] = (0.6, 0.2, 0.2),
) -> Schema:
    """Weighted scalarization over min-max normalized objectives.

    Ties break on fewer fields, then lexicographic schema_id, so selection
    is deterministic and invariant under positive rescaling of any axis.
    """
    if not front.entries:
        raise ValueError("empty front")
    vectors = front.objective_vectors()
    m = len(vectors[0])
    lows = [min(v[i] for v in vectors) for i in range(m)]
    highs = [max(v[i] for v in vectors) for i in range(m)]

    def normalized(v: tuple[float, ...], i: int) -> float:
        span = highs[i] - lows[i]
        if span <= 0:
            return 0.5
        return (v[i] - lows[i]) / span

    best = None
    best_key = None
    for entry in front.entries:
        score = sum(w * normalized(entry.objectives, i) for i, w in enumerate(scalarization))
        key = (-score, len(entry.schema.fields), entry.schema.schema_id)
        if best_key is None or key < best_key:
            best_key = key
            best = entry
    return best.schema
