"""The EXTRACT operator: deterministic raw-text predicates.

A pure function of (spec, text): regex (first match wins; capture group 1
or the whole match is the captured value), case-insensitive literal
containment, or token proximity. A value comparison attached to the spec
must also pass; a captured value that fails numeric/date coercion simply
does not match (never an error).
"""

from __future__ import annotations

import re
from functools import lru_cache

from .. import _kernels
from ..values import canonical_number, parse_date_value
from ..tokenizer import tokenize
from .ast import ExtractSpec


@lru_cache(maxsize=512)
def _compiled(pattern: str) -> re.Pattern:
    return re.compile(pattern)


def _coerce_captured(raw: str, cmp_value: object) -> object | None:
    """Coerce the captured text toward the comparison value's type."""
    if isinstance(cmp_value, (int, float)):
        canon = canonical_number(raw)
        return float(canon) if canon is not None else None
    # String comparison: dates normalize to ISO so '2001-12-31' style
    # literals compare chronologically; everything else lowercases.
    iso = parse_date_value(raw)
    if iso is not None and _looks_dateish(str(cmp_value)):
        return iso
    return " ".join(raw.split()).lower()


def _looks_dateish(value: str) -> bool:
    return bool(re.fullmatch(r"\d{4}(-\d{2}(-\d{2})?)?", value))


def _compare(left: object, op: str, right: object) -> bool:
    if isinstance(right, (int, float)):
        if not isinstance(left, (int, float)):
            return False
        right_val: object = float(right)
        left_val: object = float(left)
    else:
        right_val = " ".join(str(right).split()).lower()
        left_val = str(left)
    if op == "=":
        return left_val == right_val
    if op == "!=":
        return left_val != right_val
    if op == "<":
        return left_val < right_val
    if op == "<=":
        return left_val <= right_val
    if op == ">":
        return left_val > right_val
    if op == ">=":
        return left_val >= right_val
    return False


def eval_extract(spec: ExtractSpec, text: str) -> tuple[bool, object | None]:
    """Evaluate one EXTRACT predicate against raw document text."""
    captured: object | None = None
    if spec.cond_kind == "regex":
        m = _compiled(spec.pattern or "").search(text)
        if m is None:
            return False, None
        captured = m.group(1) if m.re.groups >= 1 else m.group(0)
        if captured is None:
            return False, None
    elif spec.cond_kind == "contains":
        if (spec.pattern or "").lower() not in text.lower():
            return False, None
        captured = spec.pattern
    else:  # near
        tokens = tokenize(text)
        term_a, term_b = spec.near_terms or ("", "")
        pos_a = _phrase_positions(tokens, term_a)
        pos_b = _phrase_positions(tokens, term_b)
        if not pos_a or not pos_b:
            return False, None
        if not _kernels.within_window(pos_a, pos_b, spec.window):
            return False, None
        captured = f"{term_a}|{term_b}"
    if spec.value_cmp is not None:
        op, cmp_value = spec.value_cmp
        coerced = _coerce_captured(str(captured), cmp_value)
        if coerced is None:
            return False, None
        if not _compare(coerced, op, cmp_value):
            return False, None
        return True, coerced
    return True, captured


def _phrase_positions(tokens: list[str], term: str) -> list[int]:
    phrase = tokenize(term)
    if not phrase:
        return []
    if len(phrase) == 1:
        return [i for i, t in enumerate(tokens) if t == phrase[0]]
    from ..tokenizer import token_positions

    return token_positions(tokens, phrase)
