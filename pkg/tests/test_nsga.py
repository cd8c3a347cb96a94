"""NSGA-II machinery: sorting, crowding, optimization vs brute force."""

from __future__ import annotations

import itertools
import random

import pytest

from docsieve.annotate.extractors import keyed_pattern_for
from docsieve.clustering import Clustering
from docsieve.corpus import Document
from docsieve.errors import NoFeasibleSchema
from docsieve.hints import ExtractorConfig
from docsieve.induce.mining import MinedField
from docsieve.induce.nsga import (
    FitnessContext,
    Genome,
    OptimizationParams,
    ParetoFront,
    FrontEntry,
    crowding_distance,
    evaluate_genome,
    non_dominated_sort,
    nsga2_optimize,
    select_schema,
)
from docsieve.induce.quality import QualityReport, QualityWeights
from docsieve.schema import FeasibilityLimits, FieldSpec, Schema, build_tier_hierarchy

import numpy as np

from .oracles import brute_force_fronts


def test_sort_strict_dominance():
    assert non_dominated_sort([(1, 1, 1), (0, 0, 0)]) == [[0], [1]]


def test_sort_mutually_nondominating():
    assert non_dominated_sort([(1, 0, 0), (0, 1, 0), (0, 0, 1)]) == [[0, 1, 2]]


def test_sort_matches_brute_force_on_random_populations():
    rng = random.Random(7)
    for _ in range(10):
        points = [
            (rng.randint(0, 5), rng.randint(0, 5), rng.randint(0, 5)) for _ in range(20)
        ]
        assert non_dominated_sort(points) == brute_force_fronts(points)


def test_crowding_two_members_infinite():
    assert crowding_distance([(0.0, 1.0), (1.0, 0.0)]) == [float("inf"), float("inf")]


def test_crowding_collinear_middle():
    # Evenly spaced on every axis: middle member accumulates 1.0 per objective.
    front = [(0.0, 0.0, 0.0), (0.5, 0.5, 0.5), (1.0, 1.0, 1.0)]
    dist = crowding_distance(front)
    assert dist[0] == float("inf") and dist[2] == float("inf")
    assert dist[1] == pytest.approx(3.0, abs=1e-12)


def test_crowding_duplicate_interior_zero():
    # A duplicate flanked by its own copies has zero gap on every axis.
    front = [(0.0,), (0.5,), (0.5,), (0.5,), (1.0,)]
    dist = crowding_distance(front)
    assert 0.0 in dist
    interior = [d for d in dist if d != float("inf")]
    assert all(d >= 0.0 and d != float("inf") for d in interior)


# --- optimization fixtures ------------------------------------------------------


def small_pool():
    def mk(name, value_type, tier, label):
        return MinedField(
            spec=FieldSpec(
                name=name,
                description=f"value following the '{label}' label",
                value_type=value_type,
                tier=tier,
                extraction_hint=ExtractorConfig(
                    kind="keyed_pattern", pattern=keyed_pattern_for(label)
                ),
            ),
            support=1.0,
        )

    return [
        mk("kind", "categorical", "fast", "Kind"),
        mk("topic", "string", "sem", "Topic"),
        mk("fee", "number", "fast", "Fee"),
    ]


def small_context():
    filler = (
        "The proceedings considered extensive documentary material and the "
        "parties addressed jurisdiction, procedure and remedy in turn before "
        "the panel reserved its decision for later written reasons. " * 2
    )
    docs = []
    for i in range(12):
        topic = "alpha review" if i % 2 == 0 else "beta dispute"
        docs.append(
            Document.make(
                f"d{i:02d}",
                f"Kind: {'x' if i % 2 else 'y'}\nTopic: {topic}\nFee: {100 + i}.50\n{filler}",
            )
        )
    clustering = Clustering(
        k=2,
        assignments={f"d{i:02d}": i % 2 for i in range(12)},
        centroids=np.zeros((2, 4)),
        inertia=0.0,
    )
    return FitnessContext(
        sample=docs,
        clustering=clustering,
        query_history=["kind = 'x'", "fee >= 100", "topic = 'alpha review'"],
    )


def brute_force_front(pool, limits, weights, context):
    """Enumerate every inclusion mask x tier assignment, score, and keep the
    non-dominated feasible objective vectors."""
    evaluations = []
    n = len(pool)
    for mask_bits in itertools.product([False, True], repeat=n):
        if not any(mask_bits):
            continue
        included = [i for i, on in enumerate(mask_bits) if on]
        for tier_combo in itertools.product(("fast", "sem", "detail"), repeat=len(included)):
            tiers = ["fast"] * n
            for idx, tier in zip(included, tier_combo):
                tiers[idx] = tier
            genome = Genome(mask=tuple(mask_bits), tiers=tuple(tiers), groups=(0,) * n)
            ev = evaluate_genome(genome, pool, limits, weights, context)
            if ev.feasible:
                evaluations.append(ev.objectives)
    distinct = sorted(set(evaluations))
    fronts = brute_force_fronts(distinct)
    return {distinct[i] for i in fronts[0]}


def test_nsga2_front_equals_brute_force_enumeration():
    pool = small_pool()
    limits = FeasibilityLimits()
    weights = QualityWeights()
    context = small_context()
    expected = brute_force_front(pool, limits, weights, context)
    for seed in (0, 1, 2):
        front = nsga2_optimize(
            pool,
            None,
            OptimizationParams(pop_size=32, generations=20, mutation_rate=0.25, rng_seed=seed),
            limits,
            weights,
            context,
        )
        got = set(front.objective_vectors())
        assert got == expected, f"seed {seed}: {got ^ expected}"


def test_nsga2_front_pairwise_nondominated():
    pool = small_pool()
    front = nsga2_optimize(
        pool,
        None,
        OptimizationParams(pop_size=16, generations=8, rng_seed=9),
        FeasibilityLimits(),
        QualityWeights(),
        small_context(),
    )
    vectors = front.objective_vectors()
    for i, a in enumerate(vectors):
        for j, b in enumerate(vectors):
            if i == j:
                continue
            assert not (
                all(x >= y for x, y in zip(a, b)) and any(x > y for x, y in zip(a, b))
            )


def test_nsga2_respects_constraints():
    pool = small_pool()
    limits = FeasibilityLimits()
    front = nsga2_optimize(
        pool,
        None,
        OptimizationParams(pop_size=16, generations=8, rng_seed=4),
        limits,
        QualityWeights(),
        small_context(),
    )
    for entry in front.entries:
        assert entry.schema.hierarchy.depth() <= limits.max_depth
        assert entry.schema.hierarchy.branching_factor() <= limits.max_branching
        assert entry.report.t_estimate_seconds <= limits.t_max_seconds
        assert entry.report.store_size_ratio <= limits.storage_ratio_rho


def test_nsga2_infeasible_rho_raises():
    pool = small_pool()
    tight = FeasibilityLimits(storage_ratio_rho=1e-6)
    with pytest.raises(NoFeasibleSchema) as err:
        nsga2_optimize(
            pool,
            None,
            OptimizationParams(pop_size=8, generations=3, rng_seed=0),
            tight,
            QualityWeights(),
            small_context(),
        )
    assert "storage_ratio" in err.value.breakdown


def test_nsga2_deterministic_per_seed():
    pool = small_pool()
    kwargs = dict(
        seeds=None,
        params=OptimizationParams(pop_size=16, generations=6, rng_seed=123),
        limits=FeasibilityLimits(),
        weights=QualityWeights(),
        context=small_context(),
    )
    a = nsga2_optimize(pool, **kwargs)
    b = nsga2_optimize(pool, **kwargs)
    assert a.objective_vectors() == b.objective_vectors()
    assert [e.schema.schema_id for e in a.entries] == [e.schema.schema_id for e in b.entries]


# --- selection ------------------------------------------------------------------------


def _entry(schema_id, n_fields, objectives):
    fields = [
        FieldSpec(name=f"f{i}", description="d", value_type="categorical", tier="fast")
        for i in range(n_fields)
    ]
    schema = Schema(
        schema_id=schema_id,
        granularity_label="evolved",
        fields=tuple(fields),
        hierarchy=build_tier_hierarchy(fields),
    )
    return FrontEntry(
        schema=schema,
        objectives=objectives,
        report=QualityReport(cov=0, disc=0, cons=0, match=0, q=objectives[0]),
    )


def test_select_singleton():
    front = ParetoFront(entries=[_entry("only", 2, (0.5, -0.1, -0.1))])
    assert select_schema(front).schema_id == "only"


def test_select_dominant_member_for_any_positive_weights():
    front = ParetoFront(
        entries=[
            _entry("best", 2, (0.9, -0.1, -0.1)),
            _entry("worse", 2, (0.5, -0.5, -0.5)),
        ]
    )
    for weights in [(0.6, 0.2, 0.2), (0.1, 0.8, 0.1), (0.3, 0.3, 0.4)]:
        assert select_schema(front, weights).schema_id == "best"


def test_select_hand_computed_scalarization():
    # normalized: a=(1,0,1), b=(0,1,0.5), c=(0.5,0.5,0)
    # scores (0.6,0.2,0.2): a=0.8, b=0.3, c=0.4 -> a
    front = ParetoFront(
        entries=[
            _entry("a", 3, (0.9, -0.4, -0.1)),
            _entry("b", 3, (0.5, -0.2, -0.2)),
            _entry("c", 3, (0.7, -0.3, -0.3)),
        ]
    )
    assert select_schema(front, (0.6, 0.2, 0.2)).schema_id == "a"


def test_select_invariant_under_axis_rescaling():
    base = [
        ("a", (0.9, -0.4, -0.1)),
        ("b", (0.5, -0.2, -0.2)),
        ("c", (0.7, -0.3, -0.3)),
    ]
    front1 = ParetoFront(entries=[_entry(n, 3, v) for n, v in base])
    scaled = [(n, (v[0] * 100, v[1] * 7, v[2] * 0.001)) for n, v in base]
    front2 = ParetoFront(entries=[_entry(n, 3, v) for n, v in scaled])
    assert (
        select_schema(front1, (0.6, 0.2, 0.2)).schema_id
        == select_schema(front2, (0.6, 0.2, 0.2)).schema_id
    )


def test_select_tie_breaks_on_fewer_fields_then_id():
    front = ParetoFront(
        entries=[
            _entry("zz", 2, (0.5, -0.1, -0.1)),
            _entry("aa", 3, (0.5, -0.1, -0.1)),
        ]
    )
    assert select_schema(front).schema_id == "zz"
    front = ParetoFront(
        entries=[
            _entry("zz", 2, (0.5, -0.1, -0.1)),
            _entry("aa", 2, (0.5, -0.1, -0.1)),
        ]
    )
    assert select_schema(front).schema_id == "aa"