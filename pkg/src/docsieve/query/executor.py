"""Plan execution: index intersection, EXTRACT filtering, joins, projection.

The executor touches only the annotation store and raw document text; it
has no dependency on any annotator or external endpoint. Within the extract
stage every predicate is evaluated for every surviving candidate (no
short-circuiting), so extract_invocations is exactly
|candidates| x |extract predicates| and the latency profile is an honest
measurement of the two-stage model.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from ..values import canonical_number
from ..errors import ExecutionError, QuerySemanticError
from ..store import AnnotationStore
from .ast import (
    ExtractSpec,
    FieldRef,
    OrGroup,
    ProjAggregate,
    ProjField,
    SchemaPred,
    SelectStmt,
    Statement,
)
from .extract import eval_extract
from .parser import parse_script
from .planner import STORE_SOURCE_NAME, Plan, SourceStage, plan

MULTI_VALUE_SEPARATOR = "; "


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple]

    def bare_columns(self) -> set[str]:
        return {c.rsplit(".", 1)[-1] for c in self.columns}

    def column_index(self, ref: FieldRef) -> int:
        wanted = ref.display()
        if wanted in self.columns:
            return self.columns.index(wanted)
        matches = [
            i for i, c in enumerate(self.columns) if c.rsplit(".", 1)[-1] == ref.name
        ]
        if len(matches) == 1:
            return matches[0]
        if not matches:
            raise QuerySemanticError(f"no column {ref.display()!r} in temp table")
        raise QuerySemanticError(f"ambiguous column {ref.name!r} in temp table")

    def to_json_rows(self) -> list[dict]:
        return [dict(zip(self.columns, row)) for row in self.rows]


@dataclass
class LatencyProfile:
    l_index_seconds: float = 0.0
    candidate_count: int = 0
    extract_invocations: int = 0
    l_extract_total_seconds: float = 0.0
    total_seconds: float = 0.0

    def to_json(self) -> dict:
        return {
            "l_index_seconds": self.l_index_seconds,
            "candidate_count": self.candidate_count,
            "extract_invocations": self.extract_invocations,
            "l_extract_total_seconds": self.l_extract_total_seconds,
            "total_seconds": self.total_seconds,
        }

    def structural(self) -> dict:
        """The deterministic (timing-free) slice of the profile."""
        return {
            "candidate_count": self.candidate_count,
            "extract_invocations": self.extract_invocations,
        }


@dataclass
class _Row:
    """One candidate row during execution: (source, column) -> cell."""

    cells: dict[tuple[str, str], object] = field(default_factory=dict)

    def get(self, source: str, name: str):
        return self.cells.get((source, name))


def _normalize_cell(value: object) -> str:
    return " ".join(str(value).split()).lower()


def _typed_equal(cell: object, wanted: object) -> bool:
    if cell is None:
        return False
    if isinstance(wanted, (int, float)):
        canon = canonical_number(str(cell))
        return canon is not None and float(canon) == float(wanted)
    return _normalize_cell(cell) == _normalize_cell(wanted)


def _typed_compare(cell: object, op: str, wanted: object) -> bool:
    """NULL-rejecting comparison used for row filters and OR-group members."""
    if cell is None:
        return False
    if op == "=":
        return _typed_equal(cell, wanted)
    if op == "!=":
        return not _typed_equal(cell, wanted)
    if op == "IN":
        return any(_typed_equal(cell, w) for w in wanted)
    if isinstance(wanted, (int, float)):
        canon = canonical_number(str(cell))
        if canon is None:
            return False
        left: object = float(canon)
        right: object = float(wanted)
    else:
        left = _normalize_cell(cell)
        right = _normalize_cell(wanted)
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    if op == ">=":
        return left >= right
    return False


class Executor:
    def __init__(self, store: AnnotationStore, temp_tables: dict[str, ResultTable] | None = None):
        self.store = store
        self.temp_tables = dict(temp_tables or {})
        self._text_cache: dict[str, str] = {}

    # --- public entry points -------------------------------------------------

    def execute(self, the_plan: Plan) -> tuple[ResultTable, LatencyProfile]:
        profile = LatencyProfile()
        started = time.perf_counter()
        relations: dict[str, list[_Row]] = {}
        for stage in the_plan.stages:
            relations[stage.source] = self._run_stage(stage, profile)

        stmt = the_plan.statement
        current = relations[stmt.source]
        current_sources = {stmt.source}
        for join_step in the_plan.joins:
            right_rows = relations[join_step.source]
            current = self._hash_join(
                current, current_sources, right_rows, join_step
            )
            current_sources.add(join_step.source)

        table = self._project(stmt, current, current_sources)
        profile.total_seconds = time.perf_counter() - started
        return table, profile

    # --- stage execution --------------------------------------------------------

    def _run_stage(self, stage: SourceStage, profile: LatencyProfile) -> list[_Row]:
        if stage.is_store:
            return self._run_store_stage(stage, profile)
        return self._run_temp_stage(stage, profile)

    def _run_store_stage(self, stage: SourceStage, profile: LatencyProfile) -> list[_Row]:
        store = self.store
        index_started = time.perf_counter()
        candidates: list[str] | None = None
        for step in stage.index_steps:
            ids = self._resolve_index_pred(step.pred)
            if candidates is None:
                candidates = ids
            else:
                from .._kernels import intersect_sorted

                candidates = intersect_sorted(candidates, ids)
            if not candidates:
                candidates = []
                break
        if candidates is None:
            candidates = store.doc_ids
        profile.l_index_seconds += time.perf_counter() - index_started
        profile.candidate_count += len(candidates)

        extract_started = time.perf_counter()
        survivors: list[tuple[str, dict[str, object]]] = []
        for doc_id in candidates:
            ok = True
            captures: dict[str, object] = {}
            if stage.extract_steps or stage.mixed_groups:
                text = self._raw_text(doc_id)
            for spec in stage.extract_steps:
                matched, captured = eval_extract(spec, text)
                profile.extract_invocations += 1
                if matched:
                    captures[spec.alias] = captured
                else:
                    ok = False
            for group in stage.mixed_groups:
                hit = False
                for member in group.members:
                    if isinstance(member, ExtractSpec):
                        matched, captured = eval_extract(member, text)
                        profile.extract_invocations += 1
                        if matched:
                            captures.setdefault(member.alias, captured)
                            hit = True
                    else:
                        if self._stored_pred_holds(doc_id, member):
                            hit = True
                if not hit:
                    ok = False
            if ok:
                survivors.append((doc_id, captures))
        profile.l_extract_total_seconds += time.perf_counter() - extract_started

        return [self._store_row(stage.source, doc_id, captures) for doc_id, captures in survivors]

    def _resolve_index_pred(self, pred) -> list[str]:
        store = self.store
        if isinstance(pred, OrGroup):
            union: set[str] = set()
            for member in pred.members:
                union.update(self._resolve_index_pred(member))
            return sorted(union)
        name = pred.field.name
        if name == "doc_id":
            all_ids = store.doc_ids
            if pred.op == "=":
                return [d for d in all_ids if d == str(pred.value)]
            if pred.op == "IN":
                wanted = {str(v) for v in pred.value}
                return [d for d in all_ids if d in wanted]
            return [d for d in all_ids if d != str(pred.value)]
        tier = store.schema.field_map()[name].tier
        if tier == "sem":
            if pred.op == "IN":
                union = set()
                for v in pred.value:
                    union.update(store.lookup_sem(name, "equals", str(v)))
                return sorted(union)
            if pred.op == "!=":
                # Any-value semantics over multi-valued fields: the document
                # has at least one value different from the literal.
                wanted = _normalize_cell(pred.value)
                out = []
                for doc_id in store.sem_non_null(name):
                    values = store.docs.objects[doc_id].get(name, [])
                    if any(_normalize_cell(v) != wanted for v in values):
                        out.append(doc_id)
                return out
            return store.lookup_sem(name, "equals", str(pred.value))
        return store.lookup_fast(name, pred.op, pred.value)

    def _stored_pred_holds(self, doc_id: str, pred: SchemaPred) -> bool:
        """Evaluate a schema predicate against one document's stored values."""
        name = pred.field.name
        if name == "doc_id":
            return _typed_compare(doc_id, pred.op, pred.value)
        spec = self.store.schema.field_map()[name]
        if spec.tier == "fast":
            cell = self.store.fast.rows[doc_id].get(name)
            return _typed_compare(cell, pred.op, pred.value)
        values = self.store.docs.objects.get(doc_id, {}).get(name, [])
        if pred.op == "IN":
            return any(
                any(_typed_equal(v, w) for v in values) for w in pred.value
            )
        return any(_typed_compare(v, pred.op, pred.value) for v in values)

    def _store_row(self, source: str, doc_id: str, captures: dict[str, object]) -> _Row:
        row = _Row()
        row.cells[(source, "doc_id")] = doc_id
        fast_row = self.store.fast.rows[doc_id]
        for col in self.store.fast.columns:
            row.cells[(source, col.name)] = fast_row.get(col.name)
        for name, values in self.store.docs.objects.get(doc_id, {}).items():
            row.cells[(source, name)] = (
                MULTI_VALUE_SEPARATOR.join(values) if values else None
            )
        for alias, captured in captures.items():
            row.cells[(source, alias)] = _format_captured(captured)
        return row

    def _run_temp_stage(self, stage: SourceStage, profile: LatencyProfile) -> list[_Row]:
        table = self.temp_tables[stage.source]
        rows: list[_Row] = []
        for raw in table.rows:
            row = _Row()
            for col, cell in zip(table.columns, raw):
                bare = col.rsplit(".", 1)[-1]
                row.cells[(stage.source, bare)] = cell
            rows.append(row)
        for pred in stage.row_filters:
            rows = [
                r for r in rows
                if _typed_compare(r.get(stage.source, pred.field.name), pred.op, pred.value)
            ]
        # Extract predicates over temp rows need document provenance.
        if stage.extract_steps or stage.mixed_groups:
            extract_started = time.perf_counter()
            profile.candidate_count += len(rows)
            kept = []
            for row in rows:
                doc_id = row.get(stage.source, "doc_id")
                if doc_id is None:
                    raise QuerySemanticError(
                        f"EXTRACT over {stage.source!r} needs a doc_id column"
                    )
                text = self._raw_text(str(doc_id))
                ok = True
                for spec in stage.extract_steps:
                    matched, captured = eval_extract(spec, text)
                    profile.extract_invocations += 1
                    if matched:
                        row.cells[(stage.source, spec.alias)] = _format_captured(captured)
                    else:
                        ok = False
                for group in stage.mixed_groups:
                    hit = False
                    for member in group.members:
                        if isinstance(member, ExtractSpec):
                            matched, captured = eval_extract(member, text)
                            profile.extract_invocations += 1
                            if matched:
                                hit = True
                        elif _typed_compare(
                            row.get(stage.source, member.field.name), member.op, member.value
                        ):
                            hit = True
                    if not hit:
                        ok = False
                if ok:
                    kept.append(row)
            rows = kept
            profile.l_extract_total_seconds += time.perf_counter() - extract_started
        else:
            # Pure row-filter OR groups (no extract member anywhere).
            for group in stage.mixed_groups:
                rows = [
                    r
                    for r in rows
                    if any(
                        isinstance(m, SchemaPred)
                        and _typed_compare(r.get(stage.source, m.field.name), m.op, m.value)
                        for m in group.members
                    )
                ]
        return rows

    def _raw_text(self, doc_id: str) -> str:
        hit = self._text_cache.get(doc_id)
        if hit is None:
            try:
                hit = self.store.raw_text(doc_id)
            except (KeyError, OSError) as exc:
                raise ExecutionError(doc_id, f"raw text unavailable: {exc}") from exc
            self._text_cache[doc_id] = hit
        return hit

    # --- joins -------------------------------------------------------------------

    def _hash_join(
        self,
        left_rows: list[_Row],
        left_sources: set[str],
        right_rows: list[_Row],
        join_step,
    ) -> list[_Row]:
        left_ref, right_ref = join_step.left, join_step.right

        def side_of(ref: FieldRef) -> str:
            if ref.source is not None:
                return "left" if ref.source in left_sources else "right"
            for row in left_rows[:1]:
                if any(key[1] == ref.name for key in row.cells):
                    return "left"
            return "right"

        if side_of(left_ref) == "right" or side_of(right_ref) == "left":
            left_ref, right_ref = right_ref, left_ref

        def key_of(row: _Row, ref: FieldRef, sources: set[str]):
            if ref.source is not None:
                cell = row.get(ref.source, ref.name)
            else:
                hits = [v for (src, name), v in row.cells.items() if name == ref.name]
                cell = hits[0] if hits else None
            if cell is None:
                return None
            return _normalize_cell(cell)

        right_source_set = {join_step.source}
        build_left = len(left_rows) <= len(right_rows)
        join_step.build_side = "left" if build_left else join_step.source
        if build_left:
            table: dict[object, list[_Row]] = {}
            for row in left_rows:
                k = key_of(row, left_ref, left_sources)
                if k is not None:
                    table.setdefault(k, []).append(row)
            out = []
            for row in right_rows:
                k = key_of(row, right_ref, right_source_set)
                if k is None:
                    continue
                for match in table.get(k, []):
                    merged = _Row(cells=dict(match.cells))
                    merged.cells.update(row.cells)
                    out.append(merged)
            return out
        table = {}
        for row in right_rows:
            k = key_of(row, right_ref, right_source_set)
            if k is not None:
                table.setdefault(k, []).append(row)
        out = []
        for row in left_rows:
            k = key_of(row, left_ref, left_sources)
            if k is None:
                continue
            for match in table.get(k, []):
                merged = _Row(cells=dict(row.cells))
                merged.cells.update(match.cells)
                out.append(merged)
        return out

    # --- projection / aggregation ---------------------------------------------------

    def _cell_for_ref(self, row: _Row, ref: FieldRef, sources: set[str]):
        if ref.source is not None:
            return row.get(ref.source, ref.name)
        hits = [v for (src, name), v in row.cells.items() if name == ref.name]
        if not hits:
            return None
        return hits[0]

    def _project(
        self, stmt: SelectStmt, rows: list[_Row], sources: set[str]
    ) -> ResultTable:
        if stmt.is_aggregate():
            table = self._aggregate(stmt, rows, sources)
            if stmt.order_by:
                for ref, desc in reversed(stmt.order_by):
                    idx = _order_column_index(table, ref)
                    table.rows.sort(key=lambda r: _sort_key(r[idx]), reverse=desc)
            if stmt.limit is not None:
                table.rows = table.rows[: stmt.limit]
            return table

        # Ordering happens on the underlying rows, so ORDER BY may reference
        # fields that are not projected.
        if stmt.order_by:
            for ref, desc in reversed(stmt.order_by):
                rows = sorted(
                    rows,
                    key=lambda r: _sort_key(self._cell_for_ref(r, ref, sources)),
                    reverse=desc,
                )
        if stmt.limit is not None:
            rows = rows[: stmt.limit]

        columns = [p.column_name() for p in stmt.projections]
        # Provenance: doc_id for every source, unless already projected.
        provenance = []
        multi = len(sources) > 1
        ordered_sources = [stmt.source] + [j.source for j in stmt.joins]
        for s in ordered_sources:
            col = f"{s}.doc_id" if multi else "doc_id"
            if col not in columns:
                provenance.append((s, col))
        out_rows = []
        for row in rows:
            cells = []
            for proj in stmt.projections:
                cells.append(self._cell_for_ref(row, proj.ref, sources))
            for s, _col in provenance:
                cells.append(row.get(s, "doc_id"))
            out_rows.append(tuple(cells))
        return ResultTable(
            columns=columns + [col for _, col in provenance], rows=out_rows
        )

    def _aggregate(
        self, stmt: SelectStmt, rows: list[_Row], sources: set[str]
    ) -> ResultTable:
        group_refs = stmt.group_by
        groups: dict[tuple, list[_Row]] = {}
        for row in rows:
            key = tuple(
                _normalize_cell(self._cell_for_ref(row, ref, sources))
                if self._cell_for_ref(row, ref, sources) is not None
                else None
                for ref in group_refs
            )
            groups.setdefault(key, []).append(row)
        if not group_refs and not groups:
            groups[()] = []

        columns = [p.column_name() for p in stmt.projections]
        out_rows = []
        for key in sorted(groups, key=lambda k: tuple(str(x) for x in k)):
            members = groups[key]
            cells = []
            for proj in stmt.projections:
                if isinstance(proj, ProjField):
                    cells.append(
                        self._cell_for_ref(members[0], proj.ref, sources)
                        if members
                        else None
                    )
                else:
                    cells.append(self._eval_aggregate(proj, members, sources))
            out_rows.append(tuple(cells))
        return ResultTable(columns=columns, rows=out_rows)

    def _eval_aggregate(self, proj: ProjAggregate, members: list[_Row], sources: set[str]):
        if proj.fn == "count":
            if proj.arg is None:
                return len(members)
            return sum(
                1 for m in members if self._cell_for_ref(m, proj.arg, sources) is not None
            )
        values = []
        for m in members:
            cell = self._cell_for_ref(m, proj.arg, sources) if proj.arg else None
            if cell is None:
                continue
            canon = canonical_number(str(cell))
            if canon is not None:
                values.append(float(canon))
        if not values:
            return None
        if proj.fn == "sum":
            return _format_number(sum(values))
        if proj.fn == "min":
            return _format_number(min(values))
        if proj.fn == "max":
            return _format_number(max(values))
        return _format_number(sum(values) / len(values))


def _format_number(v: float) -> str:
    if v == int(v):
        return str(int(v))
    return repr(round(v, 10))


def _format_captured(value: object) -> object:
    if isinstance(value, float):
        return _format_number(value)
    return value


def _order_column_index(table: ResultTable, ref: FieldRef) -> int:
    wanted = ref.display()
    if wanted in table.columns:
        return table.columns.index(wanted)
    matches = [
        i for i, c in enumerate(table.columns) if c.rsplit(".", 1)[-1] == ref.name
    ]
    if len(matches) == 1:
        return matches[0]
    raise QuerySemanticError(f"ORDER BY column {wanted!r} not in result")


def _sort_key(cell: object):
    if cell is None:
        return (0, "", 0.0)
    canon = canonical_number(str(cell))
    if canon is not None:
        return (1, "", float(canon))
    return (2, _normalize_cell(cell), 0.0)


def execute(
    the_plan: Plan,
    store: AnnotationStore,
    temp_tables: dict[str, ResultTable] | None = None,
) -> tuple[ResultTable, LatencyProfile]:
    return Executor(store, temp_tables).execute(the_plan)


def run_statement(
    statement: Statement,
    store: AnnotationStore,
    temp_tables: dict[str, ResultTable],
) -> tuple[ResultTable, LatencyProfile, Plan]:
    """Run one statement, materializing its WITH clauses into temp_tables."""
    for name, select in statement.withs:
        if name in temp_tables or name == STORE_SOURCE_NAME:
            raise QuerySemanticError(f"temp table name {name!r} already in use")
        sub_plan = plan(select, store, temp_tables)
        table, _profile = execute(sub_plan, store, temp_tables)
        temp_tables[name] = table
    final_plan = plan(statement.select, store, temp_tables)
    table, profile = execute(final_plan, store, temp_tables)
    return table, profile, final_plan


def run_script(
    text: str, store: AnnotationStore
) -> tuple[ResultTable, list[LatencyProfile], list[Plan]]:
    """Run a multi-statement script; temp tables persist across statements."""
    statements = parse_script(text)
    temp_tables: dict[str, ResultTable] = {}
    profiles: list[LatencyProfile] = []
    plans: list[Plan] = []
    table: ResultTable | None = None
    for statement in statements:
        table, profile, the_plan = run_statement(statement, store, temp_tables)
        profiles.append(profile)
        plans.append(the_plan)
    assert table is not None
    return table, profiles, plans
