"""Two-stage query planning.

Stage 1 resolves index-backed schema constraints (cheapest first, by exact
selectivity estimates from the store's histograms) and intersects doc_id
sets. Stage 2 runs EXTRACT predicates over the surviving candidates only,
cheapest kind first (contains < regex < near). Joins hash-join with the
smaller input building. The plan explains itself as text.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import (
    QuerySemanticError,
    StoreTypeError,
    UnknownField,
    UnknownTempTable,
)
from ..store import AnnotationStore
from .ast import (
    ExtractSpec,
    FieldRef,
    OrGroup,
    ProjAggregate,
    ProjField,
    SchemaPred,
    SelectStmt,
)

STORE_SOURCE_NAME = "store"

_EXTRACT_KIND_COST = {"contains": 0, "regex": 1, "near": 2}


@dataclass
class IndexStep:
    pred: object  # SchemaPred | OrGroup (schema members only)
    selectivity: float

    def display(self) -> str:
        return f"{self.pred.display()}  [selectivity {self.selectivity:.4f}]"


@dataclass
class SourceStage:
    source: str
    is_store: bool
    index_steps: list[IndexStep] = field(default_factory=list)
    row_filters: list[SchemaPred] = field(default_factory=list)  # temp sources
    extract_steps: list[ExtractSpec] = field(default_factory=list)
    mixed_groups: list[OrGroup] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


@dataclass
class JoinStep:
    source: str
    left: FieldRef
    right: FieldRef
    build_side: str = ""  # filled at execution from actual cardinalities


@dataclass
class Plan:
    statement: SelectStmt
    stages: list[SourceStage]
    joins: list[JoinStep]
    warnings: list[str] = field(default_factory=list)

    def explain(self) -> str:
        lines = ["plan:"]
        for stage in self.stages:
            lines.append(f"  source {stage.source}:")
            if stage.index_steps:
                lines.append("    stage 1 (index):")
                for i, step in enumerate(stage.index_steps, 1):
                    verb = "lookup" if i == 1 else "intersect"
                    lines.append(f"      {i}. {verb} {step.display()}")
            elif stage.is_store:
                lines.append("    stage 1 (index): full doc_id set")
            if stage.row_filters:
                lines.append("    row filters:")
                for p in stage.row_filters:
                    lines.append(f"      - {p.display()}")
            if stage.extract_steps or stage.mixed_groups:
                lines.append("    stage 2 (extract):")
                for i, spec in enumerate(stage.extract_steps, 1):
                    lines.append(f"      {i}. {spec.display()}")
                for group in stage.mixed_groups:
                    lines.append(f"      - {group.display()}")
            for w in stage.warnings:
                lines.append(f"    warning: {w}")
        for join in self.joins:
            build = f" (build: {join.build_side})" if join.build_side else ""
            lines.append(
                f"  hash join {join.source} ON {join.left.display()} = "
                f"{join.right.display()}{build}"
            )
        for w in self.warnings:
            lines.append(f"  warning: {w}")
        return "\n".join(lines)


def _field_tier(store: AnnotationStore, name: str) -> str | None:
    spec = store.schema.field_map().get(name)
    return spec.tier if spec else None


def _check_store_pred(pred: SchemaPred, store: AnnotationStore) -> None:
    name = pred.field.name
    if name == "doc_id":
        if pred.op not in ("=", "!=", "IN"):
            raise QuerySemanticError("doc_id supports =, != and IN only")
        return
    tier = _field_tier(store, name)
    if tier is None:
        raise UnknownField(name)
    if tier == "detail":
        raise QuerySemanticError(
            f"detail field {name!r} is projectable but not filterable; use EXTRACT"
        )
    if tier == "sem":
        if pred.op not in ("=", "!=", "IN"):
            raise QuerySemanticError(
                f"sem field {name!r} supports =, != and IN only, got {pred.op!r}"
            )
        return
    col = store.fast.column(name)
    if pred.op in ("<", "<=", ">", ">="):
        if col.value_type not in ("number", "date"):
            raise StoreTypeError(
                f"range operator on non-ordered column {name!r} ({col.value_type})"
            )
    values = pred.value if pred.op == "IN" else [pred.value]
    from ..store import coerce_fast_value

    for v in values:
        coerce_fast_value(str(v), col.value_type)  # raises StoreTypeError


def _store_pred_selectivity(pred: SchemaPred, store: AnnotationStore) -> float:
    name = pred.field.name
    if name == "doc_id":
        n = len(store) or 1
        count = len(pred.value) if pred.op == "IN" else 1
        return count / n if pred.op != "!=" else 1.0
    tier = _field_tier(store, name)
    if tier == "sem":
        if pred.op == "IN":
            return min(
                1.0,
                sum(store.est_sem_selectivity(name, "equals", str(v)) for v in pred.value),
            )
        if pred.op == "!=":
            n = len(store) or 1
            eq = store.est_sem_selectivity(name, "equals", str(pred.value))
            return max(0.0, len(store.sem_non_null(name)) / n - eq)
        return store.est_sem_selectivity(name, "equals", str(pred.value))
    return store.est_fast_selectivity(name, pred.op, pred.value)


def _split_or_group(group: OrGroup) -> bool:
    """True when the group is index-resolvable (schema predicates only)."""
    return all(isinstance(m, SchemaPred) for m in group.members)


def plan(
    statement: SelectStmt,
    store: AnnotationStore,
    temp_tables: dict[str, object] | None = None,
) -> Plan:
    """Validate the statement against the store and build the staged plan."""
    temp_tables = temp_tables or {}
    sources = [statement.source] + [j.source for j in statement.joins]
    seen = set()
    for s in sources:
        if s in seen:
            raise QuerySemanticError(f"duplicate source name {s!r}")
        seen.add(s)
        if s != STORE_SOURCE_NAME and s not in temp_tables:
            raise UnknownTempTable(s)

    aliases = statement.extract_aliases()
    stage_by_source = {
        s: SourceStage(source=s, is_store=s == STORE_SOURCE_NAME) for s in sources
    }

    def owner_of(ref: FieldRef) -> str:
        if ref.source is not None:
            if ref.source not in stage_by_source:
                raise UnknownTempTable(ref.source)
            return ref.source
        if ref.name in aliases:
            return statement.source
        owners = []
        for s in sources:
            if s == STORE_SOURCE_NAME:
                if ref.name == "doc_id" or ref.name in store.schema.field_map():
                    owners.append(s)
            else:
                table = temp_tables[s]
                if ref.name in getattr(table, "bare_columns")():
                    owners.append(s)
        if not owners:
            raise UnknownField(ref.name)
        if len(owners) > 1:
            raise QuerySemanticError(
                f"ambiguous field {ref.name!r}; qualify with a source name"
            )
        return owners[0]

    # Route predicates to their owning source stage.
    for pred in statement.where:
        if isinstance(pred, SchemaPred):
            owner = owner_of(pred.field)
            stage = stage_by_source[owner]
            if stage.is_store:
                _check_store_pred(pred, store)
                stage.index_steps.append(
                    IndexStep(pred=pred, selectivity=_store_pred_selectivity(pred, store))
                )
            else:
                stage.row_filters.append(pred)
        elif isinstance(pred, ExtractSpec):
            stage_by_source[statement.source].extract_steps.append(pred)
        elif isinstance(pred, OrGroup):
            owners = set()
            for m in pred.members:
                if isinstance(m, SchemaPred):
                    owners.add(owner_of(m.field))
                else:
                    owners.add(statement.source)
            if len(owners) > 1:
                raise QuerySemanticError("OR group must reference a single source")
            owner = owners.pop()
            stage = stage_by_source[owner]
            if _split_or_group(pred) and stage.is_store:
                for m in pred.members:
                    _check_store_pred(m, store)
                sel = min(
                    1.0, sum(_store_pred_selectivity(m, store) for m in pred.members)
                )
                stage.index_steps.append(IndexStep(pred=pred, selectivity=sel))
            elif _split_or_group(pred):
                stage.mixed_groups.append(pred)  # temp sources: filter per row
            else:
                for m in pred.members:
                    if isinstance(m, SchemaPred) and stage.is_store:
                        _check_store_pred(m, store)
                stage.mixed_groups.append(pred)
        else:
            raise QuerySemanticError(f"unsupported predicate {pred!r}")

    # Validate projections / grouping / ordering references.
    for proj in statement.projections:
        if isinstance(proj, ProjField):
            owner_of(proj.ref)
        elif isinstance(proj, ProjAggregate) and proj.arg is not None:
            owner_of(proj.arg)
    for ref in statement.group_by:
        owner_of(ref)
    for ref, _ in statement.order_by:
        if ref.name not in aliases:
            owner_of(ref)
    for join in statement.joins:
        owner_of(join.left)
        owner_of(join.right)

    if statement.is_aggregate():
        group_names = {r.display() for r in statement.group_by} | {
            r.name for r in statement.group_by
        }
        for proj in statement.projections:
            if isinstance(proj, ProjField):
                if proj.ref.display() not in group_names and proj.ref.name not in group_names:
                    raise QuerySemanticError(
                        f"projection {proj.ref.display()!r} must appear in GROUP BY"
                    )

    warnings = []
    for stage in stage_by_source.values():
        stage.index_steps.sort(key=lambda s: (s.selectivity, s.pred.display()))
        stage.extract_steps.sort(
            key=lambda s: (_EXTRACT_KIND_COST[s.cond_kind], s.display())
        )
        if (
            stage.is_store
            and not stage.index_steps
            and (stage.extract_steps or stage.mixed_groups)
        ):
            stage.warnings.append("full_extract_scan")

    joins = [JoinStep(source=j.source, left=j.left, right=j.right) for j in statement.joins]
    ordered_stages = [stage_by_source[s] for s in sources]
    return Plan(statement=statement, stages=ordered_stages, joins=joins, warnings=warnings)
