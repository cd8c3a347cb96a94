from .candidates import CandidateSet, build_candidate_schemas, merge_pools
from .mining import MinedField, mine_cluster, mine_field_candidates, snake_case
from .nsga import (
    FitnessContext,
    FrontEntry,
    Genome,
    OptimizationParams,
    ParetoFront,
    crowding_distance,
    decode,
    dominates,
    encode,
    evaluate_genome,
    non_dominated_sort,
    nsga2_optimize,
    select_schema,
)
from .quality import (
    QualityReport,
    QualityWeights,
    estimate_costs,
    estimated_annotation_seconds,
    eval_consistency,
    eval_coverage,
    eval_discriminativeness,
    eval_match,
    fleiss_kappa,
    information_gain,
    quality,
    store_size_ratio,
)

__all__ = [
    "CandidateSet",
    "FitnessContext",
    "FrontEntry",
    "Genome",
    "MinedField",
    "OptimizationParams",
    "ParetoFront",
    "QualityReport",
    "QualityWeights",
    "build_candidate_schemas",
    "crowding_distance",
    "decode",
    "dominates",
    "encode",
    "estimate_costs",
    "estimated_annotation_seconds",
    "eval_consistency",
    "eval_coverage",
    "eval_discriminativeness",
    "eval_match",
    "evaluate_genome",
    "fleiss_kappa",
    "information_gain",
    "merge_pools",
    "mine_cluster",
    "mine_field_candidates",
    "non_dominated_sort",
    "nsga2_optimize",
    "quality",
    "select_schema",
    "snake_case",
    "store_size_ratio",
]
