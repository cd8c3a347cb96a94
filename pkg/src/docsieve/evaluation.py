"""Retrieval and schema-quality metrics.

Tuple precision/recall/F1 uses multiset intersection with all-cells
matching: a returned tuple is correct only when every cell equals the gold
cell after per-type normalization, and duplicates must be matched
one-to-one. Schema F1 greedily aligns induced fields to gold attributes by
embedding similarity; cohesion is mean pairwise field-description
similarity; completion is the fraction of query-referenced attributes the
schema resolves.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .values import canonical_number, parse_date_value
from .embedding import EmbeddingCache
from .errors import ColumnMismatch
from .query.ast import SelectStmt
from .query.executor import ResultTable
from .schema import Schema

SCHEMA_MATCH_THRESHOLD = 0.7


@dataclass
class PRF:
    precision: float
    recall: float
    f1: float
    flags: list[str] = field(default_factory=list)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.precision, self.recall, self.f1)


def normalize_cell(value: object) -> str:
    """Per-type cell normalization: numbers canonical, dates ISO, text folded."""
    if value is None:
        return ""
    text = " ".join(str(value).split())
    canon = canonical_number(text)
    if canon is not None:
        return canon
    # Short digit-bearing strings that parse as a date normalize to ISO;
    # free prose that merely mentions a year stays text.
    if len(text) <= 24 and any(ch.isdigit() for ch in text):
        iso = parse_date_value(text)
        if iso is not None:
            return iso
    return text.lower()


def _normalize_columns(columns: list[str]) -> list[str]:
    return [c.strip().lower() for c in columns]


def _tuple_key(row: tuple, order: list[int]) -> tuple:
    return tuple(normalize_cell(row[i]) for i in order)


def tuple_prf(result: ResultTable, gt_columns: list[str], gt_rows: list[tuple]) -> PRF:
    """Eq-style precision/recall/F1 with multiset tuple matching."""
    got_cols = _normalize_columns(result.columns)
    want_cols = _normalize_columns(list(gt_columns))
    if sorted(got_cols) != sorted(want_cols):
        raise ColumnMismatch(f"result columns {got_cols} != gold columns {want_cols}")
    order = [got_cols.index(c) for c in want_cols]

    returned = Counter(_tuple_key(row, order) for row in result.rows)
    gold = Counter(
        tuple(normalize_cell(cell) for cell in row) for row in gt_rows
    )
    overlap = sum((returned & gold).values())
    n_returned = sum(returned.values())
    n_gold = sum(gold.values())

    flags: list[str] = []
    if n_returned == 0 and n_gold == 0:
        return PRF(1.0, 1.0, 1.0, ["both_empty"])
    if n_returned == 0:
        return PRF(1.0, 0.0, 0.0, ["empty_result"])
    precision = overlap / n_returned
    recall = overlap / n_gold if n_gold else 1.0
    if n_gold == 0:
        flags.append("empty_gold")
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return PRF(precision, recall, f1, flags)


def schema_f1(
    induced: Schema,
    gold_fields: list[tuple[str, str]],
    embeddings: EmbeddingCache | None = None,
    threshold: float = SCHEMA_MATCH_THRESHOLD,
) -> float:
    """Greedy one-to-one field alignment by name+description similarity."""
    if not gold_fields:
        raise ValueError("gold schema is empty")
    embeddings = embeddings or EmbeddingCache()
    induced_texts = [(f.name, f"{f.name} {f.description}") for f in induced.fields]
    gold_texts = [(name, f"{name} {description}") for name, description in gold_fields]
    pairs = []
    for i, (iname, itext) in enumerate(induced_texts):
        for j, (gname, gtext) in enumerate(gold_texts):
            sim = embeddings.cosine(itext, gtext)
            if sim >= threshold:
                pairs.append((-sim, iname, gname, i, j))
    pairs.sort()
    used_i: set[int] = set()
    used_j: set[int] = set()
    matched = 0
    for _negsim, _iname, _gname, i, j in pairs:
        if i in used_i or j in used_j:
            continue
        used_i.add(i)
        used_j.add(j)
        matched += 1
    if not induced.fields:
        return 0.0
    precision = matched / len(induced.fields)
    recall = matched / len(gold_fields)
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def cohesion(schema: Schema, embeddings: EmbeddingCache | None = None) -> tuple[float, list[str]]:
    """Mean pairwise description similarity, mapped to [0, 1]."""
    if len(schema.fields) < 2:
        return 1.0, ["single_field"]
    embeddings = embeddings or EmbeddingCache()
    vectors = [embeddings.get(f.description) for f in schema.fields]
    total = 0.0
    count = 0
    for i in range(len(vectors)):
        for j in range(i + 1, len(vectors)):
            total += (vectors[i].cosine(vectors[j]) + 1.0) / 2.0
            count += 1
    return total / count, []


def completion(schema: Schema, benchmark_queries: list[SelectStmt]) -> tuple[float, list[str]]:
    """Fraction of distinct query-referenced fields the schema resolves."""
    known = set(schema.field_map()) | {"doc_id"}
    referenced: set[str] = set()
    for stmt in benchmark_queries:
        referenced.update(stmt.referenced_fields())
        for _name, sub in getattr(stmt, "withs", []):
            referenced.update(sub.referenced_fields())
    referenced.discard("doc_id")
    if not referenced:
        return 1.0, ["no_field_references"]
    resolved = sum(1 for name in referenced if name in known)
    return resolved / len(referenced), []


@dataclass
class QueryEval:
    query_id: str
    prf: PRF
    structural_profile: dict = field(default_factory=dict)
    error: str | None = None


@dataclass
class EvalReport:
    per_query: list[QueryEval] = field(default_factory=list)
    macro_precision: float = 0.0
    macro_recall: float = 0.0
    macro_f1: float = 0.0
    schema_f1: float = 0.0
    cohesion: float = 0.0
    completion: float = 0.0
    latency: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def finalize_macro(self) -> None:
        """Macro averages over every evaluated query; a query that failed to
        parse or execute counts as zero rather than being dropped."""
        if self.per_query:
            n = len(self.per_query)
            self.macro_precision = sum(q.prf.precision for q in self.per_query) / n
            self.macro_recall = sum(q.prf.recall for q in self.per_query) / n
            self.macro_f1 = sum(q.prf.f1 for q in self.per_query) / n

    def to_json(self) -> dict:
        """Canonical (deterministic) report: no wall-clock timings inside."""
        return {
            "per_query": [
                {
                    "query_id": q.query_id,
                    "precision": q.prf.precision,
                    "recall": q.prf.recall,
                    "f1": q.prf.f1,
                    "flags": q.prf.flags,
                    "profile": q.structural_profile,
                    "error": q.error,
                }
                for q in self.per_query
            ],
            "macro": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f1": self.macro_f1,
            },
            "schema_f1": self.schema_f1,
            "cohesion": self.cohesion,
            "completion": self.completion,
            "latency": self.latency,
            "warnings": self.warnings,
        }
