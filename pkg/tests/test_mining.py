"""Field-candidate mining and candidate-schema construction."""

from __future__ import annotations

import random

import pytest

from docsieve.corpus import Document
from docsieve.errors import EmptyPool
from docsieve.induce.candidates import build_candidate_schemas, merge_pools
from docsieve.induce.mining import mine_cluster, mine_field_candidates, snake_case


def docs_with_court(n=10):
    return [
        Document.make(f"d{i}", f"Court: Court Number {i}\nSome narrative follows here.")
        for i in range(n)
    ]


def test_keyed_miner_finds_court():
    # Hand listing: every doc carries exactly one keyed pattern, label Court.
    specs = mine_field_candidates(docs_with_court(), sample_cap=50)
    by_name = {s.name: s for s in specs}
    assert "court" in by_name
    assert by_name["court"].value_type == "string"
    assert by_name["court"].extraction_hint.kind == "keyed_pattern"


def test_random_text_yields_only_typed_families():
    rng = random.Random(5)
    words = "lorem ipsum dolor sit amet consectetur adipiscing elit".split()
    docs = [
        Document.make(f"d{i}", " ".join(rng.choice(words) for _ in range(40)))
        for i in range(10)
    ]
    specs = mine_field_candidates(docs, sample_cap=50)
    assert all(s.extraction_hint.kind in ("date", "number") for s in specs)


def test_min_support_boundary_excludes_half_frequency_pattern():
    docs = docs_with_court(4) + [
        Document.make(f"x{i}", "No keyed content in this one.") for i in range(4)
    ]
    specs = mine_field_candidates(docs, sample_cap=50, min_support=1.0)
    assert all(s.name != "court" for s in specs)
    # at 0.5 support it is included again
    specs = mine_field_candidates(docs, sample_cap=50, min_support=0.5)
    assert any(s.name == "court" for s in specs)


def test_type_inference_dates_numbers_categorical():
    docs = [
        Document.make(
            f"d{i}",
            f"Filed: {3 + i} March 200{i}\nFee: {100 + i}.50\nKind: {'claim' if i % 2 else 'appeal'}\n",
        )
        for i in range(8)
    ]
    by_name = {m.spec.name: m.spec for m in mine_cluster(docs, sample_cap=50)}
    assert by_name["filed"].value_type == "date"
    assert by_name["fee"].value_type == "number"
    assert by_name["kind"].value_type == "categorical"
    assert set(by_name["kind"].vocabulary) == {"claim", "appeal"}
    assert by_name["kind"].tier == "fast"


def test_multi_valued_keyed_field_not_fast():
    docs = [
        Document.make(f"d{i}", "Ref: 10\nRef: 20\nOther text.") for i in range(6)
    ]
    by_name = {m.spec.name: m for m in mine_cluster(docs, sample_cap=50)}
    assert by_name["ref"].multi_valued
    assert by_name["ref"].spec.tier != "fast"


def test_capitalized_ngram_promoted_to_sem():
    docs = [
        Document.make(
            f"d{i}",
            f"The matter went before the Federal Court on appeal. Case {i} continued.",
        )
        for i in range(10)
    ]
    by_name = {m.spec.name: m.spec for m in mine_cluster(docs, sample_cap=50)}
    assert "federal_court" in by_name
    assert by_name["federal_court"].tier == "sem"
    assert by_name["federal_court"].extraction_hint.kind == "dictionary"


def test_snake_case_rules():
    assert snake_case("Doc Type") == "doc_type"
    assert snake_case("Total  Sales!") == "total_sales"
    assert snake_case("2nd Reading") == "f_2nd_reading"
    assert snake_case("") == ""


def test_granularity_nesting():
    docs = [
        Document.make(
            f"d{i}",
            "A: 1\nB: 2\nC: 3\nD: 4\nE: 5\nF: 6\nG: 7\nH: 8\n"
            f"Filed: {3 + i} March 2004\nThe High Court met. The Federal Court met. "
            "The District Court met. It also addressed the Supreme Court at the time.",
        )
        for i in range(8)
    ]
    pool = mine_cluster(docs, sample_cap=50)
    cands = build_candidate_schemas([pool])
    by_id = {s.schema_id: s for s in cands.schemas()}
    lite = set(by_id["lite"].field_names())
    std = set(by_id["std"].field_names())
    full = set(by_id["full"].field_names())
    assert lite <= std <= full
    assert len(lite) <= 6 and len(std) <= 14
    assert any(f.tier == "fast" for f in by_id["lite"].fields)


def test_merge_pools_shares_same_name():
    pool_a = mine_cluster(docs_with_court(6), sample_cap=50)
    pool_b = mine_cluster(docs_with_court(6), sample_cap=50)
    merged = merge_pools([pool_a, pool_b])
    names = [m.spec.name for m in merged]
    assert names.count("court") == 1
    # brute-force check: every distinct name appears exactly once
    assert len(names) == len(set(names))


def test_small_pool_collapses_granularities():
    docs = [
        Document.make(f"d{i}", f"Kind: {'a' if i % 2 else 'b'}\nplain text") for i in range(6)
    ]
    pool = [m for m in mine_cluster(docs, sample_cap=50) if m.spec.name == "kind"]
    cands = build_candidate_schemas([pool])
    by_id = {s.schema_id: set(s.field_names()) for s in cands.schemas()}
    assert by_id["lite"] == by_id["std"] == by_id["full"]


def test_empty_pools_raise():
    with pytest.raises(EmptyPool):
        build_candidate_schemas([[], []])
