"""Evaluation metrics against independent oracles."""

from __future__ import annotations

import random

import pytest

from docsieve.errors import ColumnMismatch
from docsieve.evaluation import cohesion, completion, schema_f1, tuple_prf
from docsieve.query.executor import ResultTable
from docsieve.query.parser import parse_query
from docsieve.schema import FieldSpec, Schema, build_tier_hierarchy

from .oracles import multiset_prf


def table(columns, rows):
    return ResultTable(columns=list(columns), rows=[tuple(r) for r in rows])


def test_identical_tables_perfect():
    t = table(["doc_id"], [("a",), ("b",)])
    prf = tuple_prf(t, ["doc_id"], [("a",), ("b",)])
    assert prf.as_tuple() == (1.0, 1.0, 1.0)


def test_spec_arithmetic_case():
    t = table(["doc_id"], [("a",), ("x",)])
    prf = tuple_prf(t, ["doc_id"], [("a",)])
    assert prf.precision == pytest.approx(0.5)
    assert prf.recall == pytest.approx(1.0)
    assert prf.f1 == pytest.approx(2 / 3)


def test_duplicate_counted_once_against_singleton_gold():
    t = table(["doc_id"], [("a",), ("a",)])
    prf = tuple_prf(t, ["doc_id"], [("a",)])
    expected = multiset_prf([("a",), ("a",)], [("a",)])
    assert prf.as_tuple() == pytest.approx(expected)
    assert prf.precision == pytest.approx(0.5)


def test_empty_conventions():
    t = table(["doc_id"], [])
    assert tuple_prf(t, ["doc_id"], []).as_tuple() == (1.0, 1.0, 1.0)
    prf = tuple_prf(t, ["doc_id"], [("a",)])
    assert prf.as_tuple() == (1.0, 0.0, 0.0)
    assert "empty_result" in prf.flags


def test_column_mismatch_raises():
    t = table(["doc_id"], [("a",)])
    with pytest.raises(ColumnMismatch):
        tuple_prf(t, ["other"], [("a",)])


def test_column_order_insensitive():
    t = table(["amount", "doc_id"], [("10", "a")])
    prf = tuple_prf(t, ["doc_id", "amount"], [("a", "10")])
    assert prf.f1 == 1.0


def test_per_type_normalization():
    t = table(["amount", "filed"], [("12,500.00", "12 March 2004")])
    prf = tuple_prf(t, ["amount", "filed"], [("12500", "2004-03-12")])
    assert prf.f1 == 1.0


def test_row_permutation_invariance():
    rows = [("a", "1"), ("b", "2"), ("c", "3")]
    t1 = table(["doc_id", "v"], rows)
    t2 = table(["doc_id", "v"], list(reversed(rows)))
    gold = [("b", "2"), ("a", "1"), ("c", "3")]
    assert tuple_prf(t1, ["doc_id", "v"], gold).as_tuple() == tuple_prf(
        t2, ["doc_id", "v"], gold
    ).as_tuple()


def test_randomized_against_multiset_oracle():
    rng = random.Random(77)
    values = ["a", "b", "c", "d"]
    for _ in range(100):
        returned = [(rng.choice(values),) for _ in range(rng.randint(0, 8))]
        gold = [(rng.choice(values),) for _ in range(rng.randint(0, 8))]
        t = table(["doc_id"], returned)
        try:
            got = tuple_prf(t, ["doc_id"], gold).as_tuple()
        except ColumnMismatch:
            continue
        expected = multiset_prf(returned, gold)
        assert got == pytest.approx(expected, abs=1e-12)


def test_f1_identity_recomputed():
    rng = random.Random(5)
    for _ in range(50):
        returned = [(rng.choice("abc"),) for _ in range(rng.randint(1, 6))]
        gold = [(rng.choice("abc"),) for _ in range(rng.randint(1, 6))]
        prf = tuple_prf(table(["doc_id"], returned), ["doc_id"], gold)
        if prf.precision + prf.recall > 0:
            assert prf.f1 == pytest.approx(
                2 * prf.precision * prf.recall / (prf.precision + prf.recall), abs=1e-12
            )


# --- schema metrics ------------------------------------------------------------


def make_schema(specs):
    fields = [
        FieldSpec(name, desc, "string", "sem") for name, desc in specs
    ] + [FieldSpec("anchor", "anchor field", "categorical", "fast")]
    return Schema(
        schema_id="s",
        granularity_label="std",
        fields=tuple(fields),
        hierarchy=build_tier_hierarchy(fields),
    )


def test_schema_f1_identical_is_one():
    gold = [("court", "court of the case"), ("topic", "topic of the case")]
    schema = make_schema(gold)
    gold_with_anchor = gold + [("anchor", "anchor field")]
    assert schema_f1(schema, gold_with_anchor) == pytest.approx(1.0)


def test_schema_f1_disjoint_is_zero():
    schema = make_schema([("alpha", "first thing"), ("beta", "second thing")])
    gold = [("zzz", "qqq www eee"), ("yyy", "rrr ttt uuu")]
    assert schema_f1(schema, gold) == 0.0


def test_schema_f1_partial_hand_arithmetic():
    # 3 induced, 4 gold, 2 matched: F1 = 2*(2/3)*(2/4)/((2/3)+(2/4))
    schema = Schema(
        schema_id="s",
        granularity_label="std",
        fields=(
            FieldSpec("court", "court of the case", "string", "sem"),
            FieldSpec("topic", "topic of the case", "string", "sem"),
            FieldSpec("zzzz", "unrelated thing entirely", "categorical", "fast"),
        ),
        hierarchy=build_tier_hierarchy(
            [
                FieldSpec("court", "court of the case", "string", "sem"),
                FieldSpec("topic", "topic of the case", "string", "sem"),
                FieldSpec("zzzz", "unrelated thing entirely", "categorical", "fast"),
            ]
        ),
    )
    gold = [
        ("court", "court of the case"),
        ("topic", "topic of the case"),
        ("amount", "monetary amount involved"),
        ("judge", "presiding judge name"),
    ]
    expected = 2 * (2 / 3) * (2 / 4) / ((2 / 3) + (2 / 4))
    assert schema_f1(schema, gold) == pytest.approx(expected, abs=1e-9)


def test_cohesion_identical_descriptions():
    schema = make_schema([("a", "same words here"), ("b", "same words here")])
    # anchor has a different description, so restrict to the two fields
    two = Schema(
        schema_id="s",
        granularity_label="std",
        fields=tuple(f for f in schema.fields if f.name != "anchor"),
        hierarchy=build_tier_hierarchy(
            [f for f in schema.fields if f.name != "anchor"]
        ),
    )
    score, flags = cohesion(two)
    assert score == pytest.approx(1.0, abs=1e-9)


def test_cohesion_single_field_flagged():
    one = Schema(
        schema_id="s",
        granularity_label="lite",
        fields=(FieldSpec("a", "only", "categorical", "fast"),),
        hierarchy=build_tier_hierarchy([FieldSpec("a", "only", "categorical", "fast")]),
    )
    score, flags = cohesion(one)
    assert score == 1.0 and flags == ["single_field"]


def test_cohesion_equals_pair_enumeration():
    from docsieve.embedding import embed_text

    descs = ["alpha beta", "beta gamma", "gamma delta"]
    fields = [FieldSpec(f"f{i}", d, "string", "sem") for i, d in enumerate(descs)]
    fields.append(FieldSpec("anchor", "anchor", "categorical", "fast"))
    schema = Schema(
        schema_id="s",
        granularity_label="std",
        fields=tuple(fields),
        hierarchy=build_tier_hierarchy(fields),
    )
    all_descs = descs + ["anchor"]
    expected, count = 0.0, 0
    for i in range(len(all_descs)):
        for j in range(i + 1, len(all_descs)):
            expected += (embed_text(all_descs[i]).cosine(embed_text(all_descs[j])) + 1) / 2
            count += 1
    score, _ = cohesion(schema)
    assert score == pytest.approx(expected / count, abs=1e-12)


def test_completion_all_resolved():
    schema = make_schema([("court", "c"), ("topic", "t")])
    queries = [
        parse_query("SELECT doc_id FROM store WHERE court = 'x'").select,
        parse_query("SELECT topic FROM store WHERE anchor = 'y'").select,
    ]
    score, _ = completion(schema, queries)
    assert score == 1.0


def test_completion_ratio_and_alias_exclusion():
    schema = make_schema([("court", "c"), ("topic", "t"), ("amount", "a")])
    queries = [
        parse_query(
            "SELECT doc_id FROM store WHERE court = 'x' AND missing_one = 2 "
            "AND EXTRACT(years, 'regex:(\\d+)') AND years >= 1"
        ).select,
        parse_query("SELECT topic, amount FROM store").select,
    ]
    # referenced: court, missing_one, topic, amount (alias excluded) -> 3/4
    score, _ = completion(schema, queries)
    assert score == pytest.approx(0.75)


def test_completion_vacuous():
    schema = make_schema([("court", "c")])
    queries = [parse_query("SELECT doc_id FROM store").select]
    score, flags = completion(schema, queries)
    assert score == 1.0 and flags == ["no_field_references"]


def test_completion_monotone_under_field_addition():
    small = make_schema([("court", "c")])
    big = make_schema([("court", "c"), ("topic", "t")])
    queries = [
        parse_query("SELECT doc_id FROM store WHERE court = 'x' AND topic = 'y'").select
    ]
    s_small, _ = completion(small, queries)
    s_big, _ = completion(big, queries)
    assert s_big >= s_small
