"""Built-in extractors: the date grammar oracle table, numbers, keyed patterns."""

from __future__ import annotations

import pytest

from docsieve.annotate.extractors import (
    CompiledExtractor,
    ExtractorRegistry,
    canonical_number,
    find_dates,
    find_numbers,
    keyed_pattern_for,
    parse_date_value,
)
from docsieve.hints import ExtractorConfig

# The ten supported surface formats, written down before the implementation
# and kept frozen: (input, expected ISO under day-first parsing).
DATE_ORACLE_TABLE = [
    ("2004-03-03", "2004-03-03"),          # 1 ISO
    ("2004/3/3", "2004-03-03"),            # 2 YYYY/MM/DD
    ("03/04/2004", "2004-04-03"),          # 3 DD/MM/YYYY (day first)
    ("03-04-2004", "2004-04-03"),          # 4 DD-MM-YYYY
    ("03.04.2004", "2004-04-03"),          # 5 DD.MM.YYYY
    ("3 March 2004", "2004-03-03"),        # 6 D Month YYYY
    ("March 3, 2004", "2004-03-03"),       # 7 Month D, YYYY
    ("3 Mar 2004", "2004-03-03"),          # 8 D Mon YYYY
    ("Mar 3, 2004", "2004-03-03"),         # 9 Mon D, YYYY
    ("March 2004", "2004-03-01"),          # 10 Month YYYY -> first of month
]


@pytest.mark.parametrize("raw,expected", DATE_ORACLE_TABLE)
def test_date_grammar_oracle_table(raw, expected):
    assert parse_date_value(raw) == expected


def test_date_embedded_in_prose():
    dates = find_dates("filed on 03 March 2004 in the registry")
    assert [iso for _pos, iso in dates] == ["2004-03-03"]


def test_day_first_toggle():
    assert parse_date_value("03/04/2004", day_first=True) == "2004-04-03"
    assert parse_date_value("03/04/2004", day_first=False) == "2004-03-04"


def test_ambiguous_numeric_falls_back_when_invalid():
    # 25 can't be a month: the month-first reading is used even day-first.
    assert parse_date_value("25/04/2004", day_first=False) == "2004-04-25"


def test_invalid_date_rejected():
    assert parse_date_value("2004-13-45") is None
    assert parse_date_value("99/99/2004") is None
    assert parse_date_value("no date here") is None


def test_overlapping_parses_prefer_longest():
    dates = find_dates("on 3 March 2004 it began")
    assert len(dates) == 1
    assert dates[0][1] == "2004-03-03"


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("12,500.00", "12500"),
        ("$12,500.50", "12500.5"),
        ("3.50", "3.5"),
        ("007", "7"),
        ("0.50", "0.5"),
        ("-42", "-42"),
        ("1,000,000", "1000000"),
        ("0", "0"),
        ("-0", "0"),
        ("12.0.1", None),
        ("abc", None),
    ],
)
def test_canonical_number(raw, expected):
    assert canonical_number(raw) == expected


def test_find_numbers_skips_date_fragments():
    found = find_numbers("paid 1,200.50 on 2004-03-03 case 7")
    assert [c for _p, c in found] == ["1200.5", "7"]


def test_keyed_pattern_spec_example():
    config = ExtractorConfig(kind="keyed_pattern", pattern=keyed_pattern_for("court"))
    ext = CompiledExtractor(config=config)
    values = ext.extract("Court: High Court of Australia. Judge: Smith J.")
    assert values == ["High Court of Australia"]


def test_keyed_pattern_decimal_value_survives_dot():
    config = ExtractorConfig(kind="keyed_pattern", pattern=keyed_pattern_for("amount"))
    ext = CompiledExtractor(config=config)
    values = ext.extract("Amount: 12,500.00.\nNext line")
    assert values == ["12,500.00"]


def test_keyed_pattern_dash_form():
    config = ExtractorConfig(kind="keyed_pattern", pattern=keyed_pattern_for("status"))
    ext = CompiledExtractor(config=config)
    assert ext.extract("Status - approved\n") == ["approved"]
    # hyphenated words must not trigger the dash form
    assert ext.extract("twenty-status-three") == []


def test_dictionary_extractor_orders_by_text_position():
    config = ExtractorConfig(
        kind="dictionary", vocabulary=("Federal Court", "High Court")
    )
    ext = CompiledExtractor(config=config)
    values = ext.extract("the High Court then the Federal Court")
    assert values == ["High Court", "Federal Court"]


def test_registry_loose_variant_strips_trailing_punctuation():
    registry = ExtractorRegistry(variant="loose_tail")
    config = ExtractorConfig(kind="keyed_pattern", pattern=keyed_pattern_for("court", loose=True))
    ext = registry.resolve("court", "string", config)
    assert ext.extract("Court: High Court of Australia. Judge: X.") == [
        "High Court of Australia. Judge: X"
    ]


def test_registry_case_sensitive_variant():
    registry = ExtractorRegistry(variant="case_sensitive")
    config = ExtractorConfig(kind="keyed_pattern", pattern=keyed_pattern_for("Court"))
    ext = registry.resolve("court", "string", config)
    assert ext.extract("court: lowercase label") == []
    assert ext.extract("Court: Upper label") == ["Upper label"]
