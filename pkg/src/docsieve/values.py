"""Value parsing shared by annotation, storage and query layers.

The date grammar is a fixed list of ten surface formats normalized to
ISO-8601; ambiguous numeric dates (03/04/2004) read day-first unless
toggled, falling back to the other order when the preferred one is not a
real calendar date. Numbers canonicalize to plain decimal strings (no
currency symbols, no digit grouping, no trailing zeros).

This module is deliberately free of annotator machinery so the query
engine can coerce EXTRACT captures and predicate literals without ever
depending on the annotation package.
"""

from __future__ import annotations

import datetime
import re

_MONTHS = {
    "january": 1, "february": 2, "march": 3, "april": 4, "may": 5, "june": 6,
    "july": 7, "august": 8, "september": 9, "october": 10, "november": 11,
    "december": 12,
    "jan": 1, "feb": 2, "mar": 3, "apr": 4, "jun": 6, "jul": 7, "aug": 8,
    "sep": 9, "sept": 9, "oct": 10, "nov": 11, "dec": 12,
}
_MONTH_NAME = r"(?:january|february|march|april|may|june|july|august|september|october|november|december|jan|feb|mar|apr|jun|jul|aug|sept|sep|oct|nov|dec)\.?"
_ORD = r"(?:st|nd|rd|th)?"

# The ten recognized date formats, tried in order on each candidate region.
_DATE_PATTERNS: list[tuple[str, re.Pattern]] = [
    ("iso", re.compile(r"(?<!\d)(\d{4})-(\d{2})-(\d{2})(?!\d)")),
    ("ymd_slash", re.compile(r"(?<!\d)(\d{4})/(\d{1,2})/(\d{1,2})(?!\d)")),
    ("dmy_slash", re.compile(r"(?<!\d)(\d{1,2})/(\d{1,2})/(\d{4})(?!\d)")),
    ("dmy_dash", re.compile(r"(?<!\d)(\d{1,2})-(\d{1,2})-(\d{4})(?!\d)")),
    ("dmy_dot", re.compile(r"(?<!\d)(\d{1,2})\.(\d{1,2})\.(\d{4})(?!\d)")),
    ("d_month_y", re.compile(rf"\b(\d{{1,2}}){_ORD}\s+({_MONTH_NAME})\s*,?\s*(\d{{4}})\b", re.I)),
    ("month_d_y", re.compile(rf"\b({_MONTH_NAME})\s+(\d{{1,2}}){_ORD}\s*,?\s+(\d{{4}})\b", re.I)),
    ("d_mon_y", re.compile(rf"\b(\d{{1,2}}){_ORD}\s+({_MONTH_NAME})\s+(\d{{4}})\b", re.I)),
    ("mon_d_y", re.compile(rf"\b({_MONTH_NAME})\s+(\d{{1,2}}){_ORD},?\s+(\d{{4}})\b", re.I)),
    ("month_y", re.compile(rf"\b({_MONTH_NAME})\s+(\d{{4}})\b", re.I)),
]


def _month_no(name: str) -> int | None:
    return _MONTHS.get(name.lower().rstrip("."))


def _valid(y: int, m: int, d: int) -> str | None:
    try:
        return datetime.date(y, m, d).isoformat()
    except ValueError:
        return None


def _resolve_numeric(a: int, b: int, year: int, day_first: bool) -> str | None:
    """Two ambiguous numeric fields: preferred order first, then the swap."""
    first = (a, b) if day_first else (b, a)
    iso = _valid(year, first[1], first[0])
    if iso is None:
        iso = _valid(year, first[0], first[1])
    return iso


def find_dates(text: str, day_first: bool = True) -> list[tuple[int, str]]:
    """All recognized dates as (position, ISO string), in text order."""
    hits: list[tuple[int, int, str]] = []  # (start, -length, iso)
    for kind, pattern in _DATE_PATTERNS:
        for m in pattern.finditer(text):
            iso: str | None = None
            if kind in ("iso", "ymd_slash"):
                iso = _valid(int(m.group(1)), int(m.group(2)), int(m.group(3)))
            elif kind in ("dmy_slash", "dmy_dash", "dmy_dot"):
                iso = _resolve_numeric(int(m.group(1)), int(m.group(2)), int(m.group(3)), day_first)
            elif kind in ("d_month_y", "d_mon_y"):
                month = _month_no(m.group(2))
                if month:
                    iso = _valid(int(m.group(3)), month, int(m.group(1)))
            elif kind in ("month_d_y", "mon_d_y"):
                month = _month_no(m.group(1))
                if month:
                    iso = _valid(int(m.group(3)), month, int(m.group(2)))
            elif kind == "month_y":
                month = _month_no(m.group(1))
                if month:
                    iso = _valid(int(m.group(2)), month, 1)
            if iso is not None:
                hits.append((m.start(), -(m.end() - m.start()), iso))
    # Prefer earliest, then longest match; drop overlapping shorter parses
    # (e.g. "March 2004" inside "3 March 2004").
    hits.sort()
    out: list[tuple[int, str]] = []
    covered_until = -1
    for start, neg_len, iso in hits:
        end = start - neg_len
        if start >= covered_until:
            out.append((start, iso))
            covered_until = end
    return out


def parse_date_value(value: str, day_first: bool = True) -> str | None:
    """Normalize a captured value to ISO-8601, or None if no date is found."""
    dates = find_dates(value, day_first)
    return dates[0][1] if dates else None


_NUMBER_RE = re.compile(
    r"[$€£]\s?\d[\d,]*(?:\.\d+)?"       # currency amounts
    r"|\b\d{1,3}(?:,\d{3})+(?:\.\d+)?\b"  # comma-grouped
    r"|\b\d+\.\d+\b"                     # decimals
    r"|\b\d+\b"                          # integers
)


def canonical_number(raw: str) -> str | None:
    """Canonical decimal string: no currency, no grouping, no trailing zeros."""
    cleaned = raw.strip().lstrip("$€£").strip().replace(",", "")
    if not cleaned:
        return None
    sign = ""
    if cleaned[0] in "+-":
        sign = "-" if cleaned[0] == "-" else ""
        cleaned = cleaned[1:]
    if not cleaned or not cleaned.replace(".", "", 1).isdigit():
        return None
    if "." in cleaned:
        int_part, frac = cleaned.split(".", 1)
        frac = frac.rstrip("0")
    else:
        int_part, frac = cleaned, ""
    int_part = int_part.lstrip("0") or "0"
    out = int_part + ("." + frac if frac else "")
    if out == "0":
        sign = ""
    return sign + out


def _is_date_fragment(text: str, start: int, end: int) -> bool:
    """True when the digits at [start, end) look like part of a dotted/dashed date."""
    if start >= 2 and text[start - 1] in "-/." and text[start - 2].isdigit():
        return True
    if end + 1 < len(text) and text[end] in "-/." and text[end + 1].isdigit():
        return True
    return False


def find_numbers(text: str) -> list[tuple[int, str]]:
    """All standalone numeric amounts as (position, canonical string)."""
    out = []
    for m in _NUMBER_RE.finditer(text):
        if _is_date_fragment(text, m.start(), m.end()):
            continue
        canon = canonical_number(m.group(0))
        if canon is not None:
            out.append((m.start(), canon))
    return out
