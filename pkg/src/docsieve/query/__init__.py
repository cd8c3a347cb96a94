from .ast import (
    ExtractSpec,
    FieldRef,
    Join,
    OrGroup,
    ProjAggregate,
    ProjField,
    SchemaPred,
    SelectStmt,
    Statement,
)
from .executor import (
    Executor,
    LatencyProfile,
    ResultTable,
    execute,
    run_script,
    run_statement,
)
from .extract import eval_extract
from .parser import parse_query, parse_script
from .planner import Plan, plan

__all__ = [
    "Executor",
    "ExtractSpec",
    "FieldRef",
    "Join",
    "LatencyProfile",
    "OrGroup",
    "Plan",
    "ProjAggregate",
    "ProjField",
    "ResultTable",
    "SchemaPred",
    "SelectStmt",
    "Statement",
    "eval_extract",
    "execute",
    "parse_query",
    "parse_script",
    "plan",
    "run_script",
    "run_statement",
]
