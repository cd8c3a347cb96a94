"""The EXTRACT operator as a pure text predicate."""

from __future__ import annotations

import pytest

from docsieve.query.ast import ExtractSpec
from docsieve.query.extract import eval_extract


def test_regex_capture_with_numeric_comparison():
    spec = ExtractSpec(
        alias="years", cond_kind="regex", pattern=r"(\d+)\s+years", value_cmp=(">=", 5)
    )
    matched, captured = eval_extract(spec, "sentenced to 7 years")
    assert matched is True
    assert captured == 7.0
    matched, _ = eval_extract(spec, "sentenced to 3 years")
    assert matched is False


def test_contains_is_case_insensitive():
    spec = ExtractSpec(alias="x", cond_kind="contains", pattern="appeal")
    assert eval_extract(spec, "the APPEAL was lodged")[0] is True
    assert eval_extract(spec, "no such word")[0] is False


def test_near_window_boundary():
    spec5 = ExtractSpec(
        alias="x", cond_kind="near", near_terms=("merger", "approved"), window=5
    )
    spec1 = ExtractSpec(
        alias="x", cond_kind="near", near_terms=("merger", "approved"), window=1
    )
    text = "merger was finally approved"
    assert eval_extract(spec5, text)[0] is True   # distance 3 tokens
    assert eval_extract(spec1, text)[0] is False


def test_near_multiword_terms():
    spec = ExtractSpec(
        alias="x", cond_kind="near", near_terms=("high court", "appeal"), window=4
    )
    assert eval_extract(spec, "the high court dismissed the appeal")[0] is True


def test_regex_first_match_wins():
    spec = ExtractSpec(alias="n", cond_kind="regex", pattern=r"(\d+)")
    matched, captured = eval_extract(spec, "first 11 then 99")
    assert matched and captured == "11"


def test_capture_coercion_failure_is_no_match():
    spec = ExtractSpec(
        alias="n", cond_kind="regex", pattern=r"code (\w+)", value_cmp=(">=", 5)
    )
    matched, captured = eval_extract(spec, "code alpha")
    assert matched is False and captured is None


def test_date_coercion_for_string_comparison():
    spec = ExtractSpec(
        alias="filed",
        cond_kind="regex",
        pattern=r"filed on ([^\n.;]+)",
        value_cmp=(">", "2001-12-31"),
    )
    assert eval_extract(spec, "filed on 12 March 2004 before noon")[0] is True
    assert eval_extract(spec, "filed on 12 March 1999 before noon")[0] is False


def test_pure_function_no_state():
    spec = ExtractSpec(alias="x", cond_kind="contains", pattern="alpha")
    text = "alpha beta"
    assert eval_extract(spec, text) == eval_extract(spec, text)
