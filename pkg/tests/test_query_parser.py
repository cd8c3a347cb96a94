"""Query dialect parsing: grammar coverage and error positions."""

from __future__ import annotations

import pytest

from docsieve.errors import QuerySemanticError, QuerySyntaxError
from docsieve.query.ast import ExtractSpec, OrGroup, ProjAggregate, SchemaPred
from docsieve.query.parser import parse_query, parse_script


def test_simple_select_smoke():
    stmt = parse_query("SELECT doc_id FROM store WHERE doc_type = 'case_report'")
    select = stmt.select
    assert select.source == "store"
    assert select.schema_constraints == [("doc_type", "=", "case_report")]
    assert select.extract_predicates == []


def test_extract_with_alias_comparison_folds():
    stmt = parse_query(
        "SELECT doc_id FROM store WHERE EXTRACT(years, 'regex:(\\d+)\\s+years') AND years >= 5"
    )
    select = stmt.select
    specs = select.extract_predicates
    assert len(specs) == 1
    assert specs[0].alias == "years"
    assert specs[0].cond_kind == "regex"
    assert specs[0].value_cmp == (">=", 5)
    assert select.schema_constraints == []


def test_syntax_error_position():
    with pytest.raises(QuerySyntaxError) as err:
        parse_query("SELEC x")
    assert err.value.line == 1
    assert err.value.col == 1


def test_error_position_mid_query():
    with pytest.raises(QuerySyntaxError) as err:
        parse_query("SELECT doc_id FROM store WHERE doc_type = ")
    assert err.value.line == 1
    assert err.value.col > 40


def test_keywords_case_insensitive():
    stmt = parse_query("select doc_id from store where a = 1 and b = 'x'")
    assert len(stmt.select.where) == 2


def test_or_group_inside_parens():
    stmt = parse_query(
        "SELECT doc_id FROM store WHERE (court = 'high' OR court = 'federal') AND amount >= 5"
    )
    select = stmt.select
    group = [p for p in select.where if isinstance(p, OrGroup)]
    assert len(group) == 1
    assert len(group[0].members) == 2
    assert len(select.schema_constraints) == 1  # the AND amount pred


def test_in_list_and_empty_in():
    stmt = parse_query("SELECT doc_id FROM store WHERE doc_type IN ('a', 'b')")
    pred = stmt.select.where[0]
    assert pred.op == "IN" and pred.value == ["a", "b"]
    stmt = parse_query("SELECT doc_id FROM store WHERE doc_type IN ()")
    assert stmt.select.where[0].value == []


def test_aggregates_and_group_by():
    stmt = parse_query(
        "SELECT doc_type, count(*), sum(amount) FROM store GROUP BY doc_type"
    )
    select = stmt.select
    aggs = [p for p in select.projections if isinstance(p, ProjAggregate)]
    assert [a.column_name() for a in aggs] == ["count(*)", "sum(amount)"]
    assert [r.name for r in select.group_by] == ["doc_type"]


def test_order_limit():
    stmt = parse_query("SELECT doc_id FROM store ORDER BY amount DESC LIMIT 5")
    select = stmt.select
    assert select.order_by[0][1] is True
    assert select.limit == 5


def test_join_with_qualified_refs():
    stmt = parse_query(
        "WITH a AS (SELECT doc_id, topic FROM store WHERE doc_type = 'x'), "
        "b AS (SELECT doc_id, topic FROM store WHERE doc_type = 'y') "
        "SELECT a.doc_id, b.doc_id FROM a JOIN b ON a.topic = b.topic"
    )
    assert [name for name, _ in stmt.withs] == ["a", "b"]
    join = stmt.select.joins[0]
    assert join.source == "b"
    assert join.left.source == "a" and join.left.name == "topic"


def test_script_splits_statements():
    statements = parse_script(
        "SELECT doc_id FROM store; SELECT doc_id FROM store WHERE a = 1"
    )
    assert len(statements) == 2


def test_near_and_contains_conditions():
    stmt = parse_query(
        "SELECT doc_id FROM store WHERE EXTRACT(x, 'near:merger,approved,5') "
        "AND EXTRACT(y, 'contains:appeal')"
    )
    specs = stmt.select.extract_predicates
    assert specs[0].cond_kind == "near"
    assert specs[0].near_terms == ("merger", "approved")
    assert specs[0].window == 5
    assert specs[1].cond_kind == "contains"


def test_bad_extract_condition_is_syntax_error():
    with pytest.raises(QuerySyntaxError):
        parse_query("SELECT doc_id FROM store WHERE EXTRACT(x, 'blah:payload')")
    with pytest.raises(QuerySyntaxError):
        parse_query("SELECT doc_id FROM store WHERE EXTRACT(x, 'near:a,b')")


def test_double_alias_comparison_rejected():
    with pytest.raises(QuerySemanticError):
        parse_query(
            "SELECT doc_id FROM store WHERE EXTRACT(x, 'regex:(\\d+)') "
            "AND x >= 1 AND x <= 5"
        )


def test_string_escaping():
    stmt = parse_query("SELECT doc_id FROM store WHERE name = 'O''Brien'")
    assert stmt.select.where[0].value == "O'Brien"


def test_statement_display_round_trips_through_parser():
    text = (
        "SELECT doc_id, amount FROM store WHERE doc_type = 'case' AND amount >= 10 "
        "ORDER BY amount DESC LIMIT 3"
    )
    stmt = parse_query(text)
    rendered = stmt.select.display()
    reparsed = parse_query(rendered)
    assert reparsed.select.schema_constraints == stmt.select.schema_constraints
    assert reparsed.select.limit == stmt.select.limit
