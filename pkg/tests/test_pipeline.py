"""Pipeline orchestration: induction wiring, reproducibility, config parsing."""

from __future__ import annotations

import pytest

from docsieve.induce.quality import QualityWeights
from docsieve.pipeline import PipelineConfig, bench_pipeline, induce_schema
from docsieve.schema import validate_schema
from docsieve.synthetic import generate_corpus


def bench_config(gen, seed=0):
    return PipelineConfig(
        seed=seed,
        k=2,
        theta_cov=0.6,
        weights=QualityWeights(alpha=0.25, beta=0.1, gamma=0.15, delta=0.5),
        scalarization=(0.95, 0.025, 0.025),
        query_history=[q.history for q in gen.queries],
    )


@pytest.fixture(scope="module")
def small_gen():
    return generate_corpus(100, seed=0)


def test_induce_produces_valid_feasible_schema(small_gen):
    result = induce_schema(small_gen.corpus, bench_config(small_gen))
    assert validate_schema(result.schema).ok
    assert result.schema.hierarchy.depth() <= 4
    assert result.schema.hierarchy.branching_factor() <= 8
    assert result.report.store_size_ratio <= 0.3
    assert 0.0 <= result.report.q <= 1.0


def test_induce_same_seed_identical(small_gen):
    config = bench_config(small_gen)
    a = induce_schema(small_gen.corpus, config)
    b = induce_schema(small_gen.corpus, config)
    from docsieve.schema import schema_serialize

    assert schema_serialize(a.schema) == schema_serialize(b.schema)
    assert [e.objectives for e in a.front.entries] == [e.objectives for e in b.front.entries]


def test_config_from_dict_round_trip():
    obj = {
        "seed": 3,
        "k": 4,
        "theta_cov": 0.7,
        "weights": {"alpha": 0.4, "beta": 0.2, "gamma": 0.2, "delta": 0.2},
        "limits": {"max_depth": 3, "storage_ratio_rho": 0.25},
        "ga": {"pop_size": 16, "generations": 5},
        "scalarization": [0.8, 0.1, 0.1],
        "query_history": ["amount >= 10"],
    }
    cfg = PipelineConfig.from_dict(obj)
    assert cfg.seed == 3 and cfg.k == 4
    assert cfg.weights.alpha == 0.4
    assert cfg.limits.max_depth == 3
    assert cfg.limits.storage_ratio_rho == 0.25
    assert cfg.ga.pop_size == 16 and cfg.ga.rng_seed == 3
    assert cfg.scalarization == (0.8, 0.1, 0.1)
    assert cfg.query_history == ["amount >= 10"]


def test_bench_pipeline_skips_missing_gold(small_gen):
    import copy

    gen = copy.deepcopy(small_gen)
    gen.queries[0].rows = []
    gen.queries[0].columns = []
    report, _timings, _schema, _store = bench_pipeline(gen, bench_config(gen))
    assert any("missing gold" in w for w in report.warnings)
    assert all(q.query_id != gen.queries[0].query_id for q in report.per_query)
