"""Natural-language binder: deterministic span-to-field mapping."""

from __future__ import annotations

from docsieve.query.binder import bind_nl_query
from docsieve.schema import FieldSpec, Schema, build_tier_hierarchy


def demo_schema():
    fields = [
        FieldSpec("publish_date", "the date the case was published", "date", "fast"),
        FieldSpec("court", "the court hearing the case", "categorical", "fast"),
        FieldSpec("topic", "case topic keywords", "string", "sem"),
        FieldSpec("amount", "monetary amount at issue", "number", "fast"),
    ]
    return Schema(
        schema_id="demo",
        granularity_label="std",
        fields=tuple(fields),
        hierarchy=build_tier_hierarchy(fields),
    )


def test_binder_spec_example_by_hand_rules():
    # hand-run: "after 2001" -> (publish_date, >, 2001-12-31) since the only
    # date field wins the year comparator; "the high court" -> court = 'high
    # court' via the name-token hit with its modifier.
    draft, report = bind_nl_query("cases after 2001 in the high court", demo_schema())
    assert draft.schema_constraints == [
        ("publish_date", ">", "2001-12-31"),
        ("court", "=", "high court"),
    ]
    assert not draft.extract_predicates
    assert report.unbound == []


def test_binder_field_name_only_is_projection():
    draft, _report = bind_nl_query("topic", demo_schema())
    assert [p.column_name() for p in draft.projections] == ["topic"]
    assert draft.where == []


def test_binder_gibberish_all_unbound():
    draft, report = bind_nl_query("zorply blenk frumious", demo_schema())
    assert draft.schema_constraints == []
    assert len(draft.extract_predicates) == 1
    assert report.unbound == ["zorply blenk frumious"]
    assert report.suggested_extracts


def test_binder_number_comparator():
    draft, _ = bind_nl_query("amounts of at least 5000", demo_schema())
    assert ("amount", ">=", 5000) in draft.schema_constraints


def test_binder_before_year_start_boundary():
    draft, _ = bind_nl_query("filed before 1999", demo_schema())
    assert ("publish_date", "<", "1999-01-01") in draft.schema_constraints


def test_binder_draft_renders_parseable_dialect():
    from docsieve.query.parser import parse_query

    draft, _ = bind_nl_query("cases after 2001 in the high court", demo_schema())
    parsed = parse_query(draft.display())
    assert parsed.select.schema_constraints == draft.schema_constraints


def test_binder_deterministic():
    a, _ = bind_nl_query("cases after 2001 in the high court", demo_schema())
    b, _ = bind_nl_query("cases after 2001 in the high court", demo_schema())
    assert a.display() == b.display()
