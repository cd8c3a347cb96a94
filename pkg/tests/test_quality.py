"""Quality components: coverage, information gain, Fleiss' kappa, match, costs."""

from __future__ import annotations

import math
import random

import pytest

from docsieve.annotate.extractors import (
    ExtractorRegistry,
    consistency_ensemble,
    keyed_pattern_for,
)
from docsieve.clustering import Clustering
from docsieve.corpus import Document
from docsieve.errors import DegenerateSample, WeightsInvalid
from docsieve.hints import ExtractorConfig
from docsieve.induce.quality import (
    QualityWeights,
    estimate_costs,
    eval_consistency,
    eval_coverage,
    eval_discriminativeness,
    eval_match,
    fleiss_kappa,
    information_gain,
    quality,
)
from docsieve.induce.nsga import Genome  # noqa: F401  (import check: no cycle)
from docsieve.annotate.runner import annotate_document, resolve_extractors
from docsieve.schema import FieldSpec, Schema, build_tier_hierarchy

import numpy as np

from .oracles import hand_fleiss_kappa, hand_information_gain


def keyed(name, tier="sem", value_type="string", label=None):
    return FieldSpec(
        name=name,
        description=f"value of {name}",
        value_type=value_type,
        tier=tier,
        extraction_hint=ExtractorConfig(
            kind="keyed_pattern", pattern=keyed_pattern_for(label or name)
        ),
    )


def make_schema(fields):
    return Schema(
        schema_id="s",
        granularity_label="std",
        fields=tuple(fields),
        hierarchy=build_tier_hierarchy(list(fields)),
    )


# --- coverage -----------------------------------------------------------------


def test_coverage_all_fields_populated():
    schema = make_schema([keyed("a", tier="fast", value_type="categorical"), keyed("b")])
    docs = [Document.make(f"d{i}", "A: x\nB: y\n") for i in range(4)]
    assert eval_coverage(schema, docs, ExtractorRegistry()) == 1.0


def test_coverage_never_populated():
    schema = make_schema([keyed("a", tier="fast", value_type="categorical"), keyed("b")])
    docs = [Document.make(f"d{i}", "nothing keyed here") for i in range(4)]
    assert eval_coverage(schema, docs, ExtractorRegistry()) == 0.0


def test_coverage_half_covered_hand_count():
    # 4 fields; theta 0.5 needs >= 2 populated. Docs 0,1 have 2 fields; docs
    # 2,3 have 1 -> covered fraction 0.5 by hand.
    schema = make_schema(
        [keyed("a"), keyed("b"), keyed("c"), keyed("d")]
    )
    docs = [
        Document.make("d0", "A: 1\nB: 2\n"),
        Document.make("d1", "A: 1\nC: 3\n"),
        Document.make("d2", "A: 1\n"),
        Document.make("d3", "D: 4\n"),
    ]
    schema = make_schema([keyed("a"), keyed("b"), keyed("c"), keyed("d", tier="fast", value_type="number")])
    assert eval_coverage(schema, docs, ExtractorRegistry(), theta_cov=0.5) == 0.5


def test_coverage_monotone_in_covered_docs():
    schema = make_schema([keyed("a"), keyed("b")])
    base = [Document.make("d0", "A: 1\nB: 2\n"), Document.make("d1", "nothing")]
    before = eval_coverage(schema, base, ExtractorRegistry())
    extended = base + [Document.make("d2", "A: 1\nB: 2\n")]
    after = eval_coverage(schema, extended, ExtractorRegistry())
    assert after >= before


# --- information gain ------------------------------------------------------------


def test_information_gain_matches_hand_arithmetic_tables():
    tables = [
        [("A", "x"), ("A", "x"), ("B", "x"), ("B", "y")],
        [("A", "x"), ("A", "y"), ("B", "x"), ("B", "y")],          # IG = 0
        [("A", "x"), ("A", "x"), ("B", "y"), ("B", "y")],          # IG = 1
        [("A", "x"), ("B", "x"), ("B", "x"), ("C", "y"), ("C", "y")],
        [("A", "x"), ("A", "x"), ("A", "y"), ("B", "y"), ("B", "y"), ("B", "y")],
    ]
    for pairs in tables:
        labels = [p[0] for p in pairs]
        bins = [p[1] for p in pairs]
        assert information_gain(labels, bins) == pytest.approx(
            hand_information_gain(pairs), abs=1e-9
        )


def test_information_gain_three_vs_one_worked_case():
    # H(labels)=1; bin x holds A,A,B (H=0.918296), bin y holds B (H=0).
    pairs = [("A", "x"), ("A", "x"), ("B", "x"), ("B", "y")]
    expected = 1.0 - (3 / 4) * (-(2 / 3) * math.log2(2 / 3) - (1 / 3) * math.log2(1 / 3))
    assert information_gain([p[0] for p in pairs], [p[1] for p in pairs]) == pytest.approx(
        expected, abs=1e-9
    )


def _clustering_for(doc_ids, labels):
    return Clustering(
        k=len(set(labels)),
        assignments=dict(zip(doc_ids, labels)),
        centroids=np.zeros((len(set(labels)), 4)),
        inertia=0.0,
    )


def test_disc_perfect_split_is_one():
    schema = make_schema(
        [keyed("topic"), keyed("kind", tier="fast", value_type="categorical")]
    )
    docs = [
        Document.make("d0", "Topic: alpha\nKind: k\n"),
        Document.make("d1", "Topic: alpha\nKind: k\n"),
        Document.make("d2", "Topic: beta\nKind: k\n"),
        Document.make("d3", "Topic: beta\nKind: k\n"),
    ]
    registry = ExtractorRegistry()
    extractors = resolve_extractors(schema, registry)
    annotations = {
        d.doc_id: annotate_document(d, schema, registry, extractors) for d in docs
    }
    clustering = _clustering_for([d.doc_id for d in docs], [0, 0, 1, 1])
    disc, flags = eval_discriminativeness(schema, clustering, annotations)
    assert disc == pytest.approx(1.0, abs=1e-9)
    assert flags == []


def test_disc_constant_field_is_zero():
    schema = make_schema([keyed("topic")])
    docs = [Document.make(f"d{i}", "Topic: same\n") for i in range(4)]
    registry = ExtractorRegistry()
    extractors = resolve_extractors(schema, registry)
    annotations = {
        d.doc_id: annotate_document(d, schema, registry, extractors) for d in docs
    }
    clustering = _clustering_for([d.doc_id for d in docs], [0, 0, 1, 1])
    disc, _ = eval_discriminativeness(schema, clustering, annotations)
    assert disc == pytest.approx(0.0, abs=1e-9)


def test_disc_no_sem_fields_flagged_zero():
    schema = make_schema([keyed("kind", tier="fast", value_type="categorical")])
    clustering = _clustering_for(["d0", "d1"], [0, 1])
    disc, flags = eval_discriminativeness(schema, clustering, {})
    assert disc == 0.0
    assert flags == ["no_sem_fields"]


# --- Fleiss' kappa ------------------------------------------------------------------

WORKED_KAPPA_TABLES = [
    # (table, raters) pairs verified against the hand oracle below; the
    # classic 3-rater 2-category 4-item table first (the spec's worked case).
    [[3, 0], [0, 3], [2, 1], [1, 2]],
    [[2, 1], [2, 1], [2, 1], [2, 1]],
    [[5, 0], [5, 0], [0, 5], [0, 5]],
    [[2, 2, 2], [6, 0, 0], [0, 6, 0], [0, 0, 6], [2, 2, 2]],
    [[4, 1], [1, 4], [3, 2], [2, 3], [4, 1]],
]


@pytest.mark.parametrize("table", WORKED_KAPPA_TABLES)
def test_fleiss_kappa_matches_hand_oracle(table):
    assert fleiss_kappa(table) == pytest.approx(hand_fleiss_kappa(table), abs=1e-9)


def test_fleiss_kappa_worked_value():
    # P_bar = (1 + 1 + 1/3 + 1/3)/4 = 2/3; p = (1/2, 1/2) -> P_e = 1/2
    # kappa = (2/3 - 1/2)/(1 - 1/2) = 1/3
    assert fleiss_kappa([[3, 0], [0, 3], [2, 1], [1, 2]]) == pytest.approx(1 / 3, abs=1e-12)


def test_fleiss_kappa_degenerate_unanimous():
    with pytest.raises(DegenerateSample):
        fleiss_kappa([[3], [3], [3]])


def test_consistency_all_agree_is_one():
    schema = make_schema([keyed("a", label="A"), keyed("b", label="B")])
    docs = [Document.make(f"d{i}", f"A: value{i}\nB: other{i}\n") for i in range(6)]
    score, flags = eval_consistency(schema, docs)
    assert score == 1.0


def test_consistency_random_categories_near_zero():
    # Simulated rater table: 3 raters assign uniformly random binary
    # categories over many items; kappa should be ~0 (tolerance 0.1).
    rng = random.Random(42)
    table = []
    for _ in range(600):
        counts = [0, 0]
        for _r in range(3):
            counts[rng.randrange(2)] += 1
        table.append(counts)
    assert abs(fleiss_kappa(table)) < 0.1


def test_consistency_detects_loose_tail_disagreement():
    schema = make_schema([keyed("court")])
    # Values with a trailing clause after a period: the loose variant keeps
    # it, the strict ones stop at the period, so raters disagree.
    docs = [
        Document.make(f"d{i}", f"Court: High Court {i}. Extra trailing clause\n")
        for i in range(10)
    ]
    score, _flags = eval_consistency(schema, docs, consistency_ensemble())
    assert 0.0 <= score < 1.0


# --- match ------------------------------------------------------------------------


def test_match_identical_text_scores_one():
    schema = make_schema([keyed("court")])
    score, flags = eval_match(schema, ["court value of court"])
    assert score == pytest.approx(1.0, abs=1e-9)
    assert flags == []


def test_match_empty_history_neutral():
    schema = make_schema([keyed("court")])
    score, flags = eval_match(schema, [])
    assert score == 0.5
    assert flags == ["no_query_history"]


def test_match_equals_brute_force_max_cosine():
    from docsieve.embedding import embed_text

    schema = make_schema([keyed("court"), keyed("topic"), keyed("amount")])
    queries = ["high court appeals", "amounts over 5000"]
    expected = 0.0
    for q in queries:
        qv = embed_text(q)
        best = max(
            qv.cosine(embed_text(f"{f.name} value of {f.name}")) for f in schema.fields
        )
        expected += (best + 1) / 2
    expected /= len(queries)
    score, _ = eval_match(schema, queries)
    assert score == pytest.approx(expected, abs=1e-12)


# --- quality aggregation --------------------------------------------------------------


def test_quality_all_ones():
    report = quality(make_schema([keyed("a")]), QualityWeights(), (1.0, 1.0, 1.0, 1.0))
    assert report.q == pytest.approx(1.0, abs=1e-12)


def test_quality_projection_weights():
    report = quality(
        make_schema([keyed("a")]),
        QualityWeights(alpha=1.0, beta=0.0, gamma=0.0, delta=0.0),
        (0.7, 0.2, 0.9, 0.1),
    )
    assert report.q == pytest.approx(0.7, abs=1e-12)


def test_quality_hand_arithmetic():
    report = quality(
        make_schema([keyed("a")]),
        QualityWeights(0.25, 0.25, 0.25, 0.25),
        (0.8, 0.4, 1.0, 0.6),
    )
    assert report.q == pytest.approx(0.7, abs=1e-12)


def test_weights_must_sum_to_one():
    with pytest.raises(WeightsInvalid):
        QualityWeights(0.5, 0.5, 0.5, 0.5)


# --- costs ---------------------------------------------------------------------------


def test_estimate_costs_empty_schema_overhead_small():
    schema = make_schema([keyed("missing_everywhere", tier="fast", value_type="number")])
    docs = [
        Document.make(f"d{i}", "x" * 1024) for i in range(5)
    ]
    t_mean, ratio = estimate_costs(schema, docs, ExtractorRegistry())
    assert t_mean >= 0.0
    assert ratio < 0.05


def test_storage_ratio_gate_boundary():
    # rho = 0.3: a measured 0.31 must be infeasible, 0.29 feasible.
    from docsieve.schema import FeasibilityLimits

    limits = FeasibilityLimits()
    assert not (0.31 <= limits.storage_ratio_rho)
    assert 0.29 <= limits.storage_ratio_rho


def test_time_gate_default():
    from docsieve.schema import FeasibilityLimits

    limits = FeasibilityLimits()
    assert 0.01 <= limits.t_max_seconds
    assert limits.t_max_seconds == 120.0
