"""Query AST: schema-bound constraints, EXTRACT predicates, joins, projection."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

COMPARE_OPS = ("=", "!=", "<", "<=", ">", ">=", "IN")
EXTRACT_KINDS = ("regex", "contains", "near")
AGGREGATE_FNS = ("count", "sum", "min", "max", "avg")


@dataclass(frozen=True)
class FieldRef:
    name: str
    source: str | None = None

    def display(self) -> str:
        return f"{self.source}.{self.name}" if self.source else self.name


@dataclass(frozen=True)
class SchemaPred:
    field: FieldRef
    op: str
    value: object  # str | float | list for IN

    def display(self) -> str:
        if self.op == "IN":
            inner = ", ".join(_display_value(v) for v in self.value)
            return f"{self.field.display()} IN ({inner})"
        return f"{self.field.display()} {self.op} {_display_value(self.value)}"


@dataclass(frozen=True)
class ExtractSpec:
    """EXTRACT(alias, 'kind:payload') plus an optional comparison on the
    captured value (``alias >= 5`` folds into value_cmp)."""

    alias: str
    cond_kind: str
    pattern: str | None = None  # regex source or contains literal
    near_terms: tuple[str, str] | None = None
    window: int = 0
    value_cmp: tuple[str, object] | None = None

    def __post_init__(self) -> None:
        if self.cond_kind not in EXTRACT_KINDS:
            raise ValueError(f"unknown extract kind {self.cond_kind!r}")
        if self.cond_kind == "regex":
            compiled = re.compile(self.pattern or "")
            if compiled.groups > 1:
                raise ValueError("extract regex may have at most 1 capture group")
        if self.cond_kind == "near":
            if not self.near_terms or self.window < 1:
                raise ValueError("near requires two terms and window >= 1")

    def cond_display(self) -> str:
        if self.cond_kind == "near":
            return f"near:{self.near_terms[0]},{self.near_terms[1]},{self.window}"
        return f"{self.cond_kind}:{self.pattern}"

    def display(self) -> str:
        text = f"EXTRACT({self.alias}, '{self.cond_display()}')"
        if self.value_cmp:
            text += f" AND {self.alias} {self.value_cmp[0]} {_display_value(self.value_cmp[1])}"
        return text


@dataclass(frozen=True)
class OrGroup:
    members: tuple[object, ...]  # SchemaPred | ExtractSpec

    def display(self) -> str:
        return "(" + " OR ".join(m.display() for m in self.members) + ")"


@dataclass(frozen=True)
class ProjField:
    ref: FieldRef

    def column_name(self) -> str:
        return self.ref.display()


@dataclass(frozen=True)
class ProjAggregate:
    fn: str
    arg: FieldRef | None  # None == *

    def column_name(self) -> str:
        inner = self.arg.display() if self.arg else "*"
        return f"{self.fn}({inner})"


@dataclass(frozen=True)
class Join:
    source: str
    left: FieldRef
    right: FieldRef


@dataclass
class SelectStmt:
    projections: list
    source: str
    joins: list[Join] = field(default_factory=list)
    where: list = field(default_factory=list)  # SchemaPred | ExtractSpec | OrGroup
    group_by: list[FieldRef] = field(default_factory=list)
    order_by: list[tuple[FieldRef, bool]] = field(default_factory=list)  # (ref, desc)
    limit: int | None = None

    @property
    def schema_constraints(self) -> list[tuple[str, str, object]]:
        """C_schema as (field, op, value) triples (top-level conjuncts only)."""
        return [
            (p.field.display(), p.op, p.value)
            for p in self.where
            if isinstance(p, SchemaPred)
        ]

    @property
    def extract_predicates(self) -> list[ExtractSpec]:
        """Every EXTRACT spec in the statement, OR-group members included."""
        out = []
        for p in self.where:
            if isinstance(p, ExtractSpec):
                out.append(p)
            elif isinstance(p, OrGroup):
                out.extend(m for m in p.members if isinstance(m, ExtractSpec))
        return out

    def extract_aliases(self) -> set[str]:
        return {s.alias for s in self.extract_predicates}

    def is_aggregate(self) -> bool:
        return bool(self.group_by) or any(
            isinstance(p, ProjAggregate) for p in self.projections
        )

    def referenced_fields(self) -> set[str]:
        """Unqualified field names referenced anywhere (aliases excluded)."""
        aliases = self.extract_aliases()
        refs: set[str] = set()

        def add(ref: FieldRef) -> None:
            if ref.name not in aliases:
                refs.add(ref.name)

        for p in self.projections:
            if isinstance(p, ProjField):
                add(p.ref)
            elif isinstance(p, ProjAggregate) and p.arg:
                add(p.arg)
        for pred in self.where:
            if isinstance(pred, SchemaPred):
                add(pred.field)
            elif isinstance(pred, OrGroup):
                for m in pred.members:
                    if isinstance(m, SchemaPred):
                        add(m.field)
        for j in self.joins:
            add(j.left)
            add(j.right)
        for ref in self.group_by:
            add(ref)
        for ref, _ in self.order_by:
            add(ref)
        return refs

    def display(self) -> str:
        parts = ["SELECT " + ", ".join(p.column_name() for p in self.projections)]
        parts.append(f"FROM {self.source}")
        for j in self.joins:
            parts.append(f"JOIN {j.source} ON {j.left.display()} = {j.right.display()}")
        shown = []
        consumed: set[str] = set()
        for p in self.where:
            if isinstance(p, ExtractSpec):
                shown.append(p.display())
                consumed.add(p.alias)
            else:
                shown.append(p.display())
        if shown:
            parts.append("WHERE " + " AND ".join(shown))
        if self.group_by:
            parts.append("GROUP BY " + ", ".join(r.display() for r in self.group_by))
        if self.order_by:
            parts.append(
                "ORDER BY "
                + ", ".join(
                    r.display() + (" DESC" if desc else "") for r, desc in self.order_by
                )
            )
        if self.limit is not None:
            parts.append(f"LIMIT {self.limit}")
        return " ".join(parts)


@dataclass
class Statement:
    withs: list[tuple[str, SelectStmt]]
    select: SelectStmt


def _display_value(v: object) -> str:
    if isinstance(v, str):
        escaped = v.replace("'", "''")
        return f"'{escaped}'"
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)
