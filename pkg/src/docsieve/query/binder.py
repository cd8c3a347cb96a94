"""Deterministic natural-language query binder.

Maps spans of an NL request onto schema fields via exact name hits first,
then embedding similarity against field name+description text. Comparator
words map to operators; leftover content spans become suggested
contains-EXTRACT predicates. The result is a draft: callers show the
rendered dialect text for confirmation, nothing executes automatically.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..embedding import EmbeddingCache
from ..schema import Schema
from .ast import ExtractSpec, FieldRef, ProjField, SchemaPred, SelectStmt

DEFAULT_TAU_BIND = 0.6

_COMPARATORS = {
    "after": ">",
    "before": "<",
    "since": ">=",
    "over": ">",
    "above": ">",
    "under": "<",
    "below": "<",
    "exceeding": ">",
}
_PHRASE_COMPARATORS = {
    ("at", "least"): ">=",
    ("at", "most"): "<=",
    ("more", "than"): ">",
    ("less", "than"): "<",
    ("no", "more", "than"): "<=",
    ("no", "less", "than"): ">=",
}
_STOPWORDS = {
    "a", "an", "and", "are", "all", "any", "by", "for", "from", "give", "in",
    "is", "it", "its", "list", "me", "of", "on", "or", "show", "that", "the",
    "their", "them", "to", "was", "were", "where", "which", "with", "what",
    "who", "find", "get", "documents", "docs", "cases",
}

_TOKEN_RE = re.compile(r"\d+(?:\.\d+)?|[^\W\d_]+", re.UNICODE)


@dataclass
class BindingReport:
    bound: list[tuple[str, str]] = field(default_factory=list)  # (span, target)
    unbound: list[str] = field(default_factory=list)
    suggested_extracts: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "bound": [{"span": s, "target": t} for s, t in self.bound],
            "unbound": list(self.unbound),
            "suggested_extracts": list(self.suggested_extracts),
        }


def _year_bounds(year: int) -> tuple[str, str]:
    return f"{year}-01-01", f"{year}-12-31"


def _is_yearish(token: str) -> bool:
    return bool(re.fullmatch(r"[12]\d{3}", token))


def _date_literal(token: str, op: str) -> str:
    """Years widen to their boundary date according to the operator."""
    if _is_yearish(token):
        start, end = _year_bounds(int(token))
        if op in (">", "<="):
            return end
        if op in ("<", ">="):
            return start
        return start
    return token


def _name_token_hit(token: str, part: str) -> bool:
    return token == part or token == part + "s" or part == token + "s"


def bind_nl_query(
    nl: str,
    schema: Schema,
    tau_bind: float = DEFAULT_TAU_BIND,
    embeddings: EmbeddingCache | None = None,
) -> tuple[SelectStmt, BindingReport]:
    """Draft a structured query from natural language. Returns (draft, report)."""
    if not schema.fields:
        raise ValueError("schema has no fields")
    embeddings = embeddings or EmbeddingCache()
    tokens = [t.lower() for t in _TOKEN_RE.findall(nl)]
    report = BindingReport()
    consumed = [False] * len(tokens)
    constraints: list[SchemaPred] = []
    projections: list[ProjField] = []

    fmap = schema.field_map()
    name_tokens = {name: name.split("_") for name in fmap}

    # Whole-query == field name: projection-only draft.
    joined = "_".join(tokens)
    if joined in fmap:
        stmt = SelectStmt(projections=[ProjField(FieldRef(joined))], source="store")
        report.bound.append((nl.strip(), f"projection {joined}"))
        return stmt, report

    # Pass 1: comparator [literal] pairs -> ops on type-compatible fields.
    i = 0
    while i < len(tokens):
        op = None
        op_len = 0
        for phrase, mapped in _PHRASE_COMPARATORS.items():
            if tuple(tokens[i : i + len(phrase)]) == phrase:
                op, op_len = mapped, len(phrase)
                break
        if op is None and tokens[i] in _COMPARATORS:
            op, op_len = _COMPARATORS[tokens[i]], 1
        if op is None:
            i += 1
            continue
        j = i + op_len
        if j >= len(tokens) or not re.fullmatch(r"\d+(?:\.\d+)?", tokens[j]):
            i += 1
            continue
        literal = tokens[j]
        yearish = _is_yearish(literal)
        # Prefer an explicitly named field near the comparator; otherwise the
        # unique type-compatible field.
        target = None
        window = tokens[max(0, i - 3) : j + 2]
        for name, parts in name_tokens.items():
            if any(_name_token_hit(w, p) for w in window for p in parts):
                spec = fmap[name]
                if spec.value_type in ("number", "date"):
                    target = spec
                    break
        if target is None:
            wanted_type = "date" if yearish else "number"
            typed = [f for f in schema.fields if f.value_type == wanted_type]
            if len(typed) == 1:
                target = typed[0]
            elif not typed and yearish:
                typed = [f for f in schema.fields if f.value_type == "number"]
                if len(typed) == 1:
                    target = typed[0]
        if target is None:
            i += 1
            continue
        span = " ".join(tokens[i : j + 1])
        if target.value_type == "date":
            value: object = _date_literal(literal, op)
        else:
            value = float(literal) if "." in literal else int(literal)
        constraints.append(SchemaPred(field=FieldRef(target.name), op=op, value=value))
        report.bound.append((span, f"{target.name} {op} {value}"))
        for k in range(i, j + 1):
            consumed[k] = True
        i = j + 1

    # Pass 2: field-name token hits -> equality constraints with the adjacent
    # modifier span as the value (e.g. "the high court" -> court = 'high court').
    for idx, tok in enumerate(tokens):
        if consumed[idx]:
            continue
        for name, parts in name_tokens.items():
            if tok != parts[-1] or len(parts) > 1 and tokens[max(0, idx - len(parts) + 1) : idx + 1] != parts:
                continue
            spec = fmap[name]
            if spec.value_type not in ("categorical", "string", "string_set"):
                continue
            if any(c.field.name == name for c in constraints):
                continue
            start = idx
            value_tokens = []
            back = idx - 1
            while back >= 0 and not consumed[back] and tokens[back] not in _STOPWORDS:
                value_tokens.insert(0, tokens[back])
                start = back
                back -= 1
            if not value_tokens:
                # Name mention without a modifier: treat as projection.
                if not any(
                    isinstance(p, ProjField) and p.ref.name == name for p in projections
                ):
                    projections.append(ProjField(FieldRef(name)))
                    report.bound.append((tok, f"projection {name}"))
                consumed[idx] = True
                break
            value = " ".join(value_tokens + ([tok] if len(parts) == 1 else []))
            constraints.append(SchemaPred(field=FieldRef(name), op="=", value=value))
            report.bound.append((" ".join(tokens[start : idx + 1]), f"{name} = '{value}'"))
            for k in range(start, idx + 1):
                consumed[k] = True
            break

    # Pass 3: embedding similarity for leftover content tokens.
    field_vectors = {
        f.name: embeddings.get(f"{f.name} {f.description}") for f in schema.fields
    }
    for idx, tok in enumerate(tokens):
        if consumed[idx] or tok in _STOPWORDS:
            continue
        qv = embeddings.get(tok)
        best_name, best_sim = None, tau_bind
        for name, fv in field_vectors.items():
            sim = qv.cosine(fv)
            if sim > best_sim:
                best_name, best_sim = name, sim
        if best_name is not None and not any(
            isinstance(p, ProjField) and p.ref.name == best_name for p in projections
        ):
            projections.append(ProjField(FieldRef(best_name)))
            report.bound.append((tok, f"projection {best_name} (cos {best_sim:.2f})"))
            consumed[idx] = True

    # Leftover content-token runs -> suggested contains-EXTRACT predicates.
    extracts: list[ExtractSpec] = []
    run: list[str] = []
    for idx, tok in enumerate(tokens):
        if consumed[idx] or tok in _STOPWORDS:
            if run:
                phrase = " ".join(run)
                alias = f"x{len(extracts)}"
                extracts.append(
                    ExtractSpec(alias=alias, cond_kind="contains", pattern=phrase)
                )
                report.unbound.append(phrase)
                report.suggested_extracts.append(f"EXTRACT({alias}, 'contains:{phrase}')")
                run = []
            continue
        run.append(tok)
    if run:
        phrase = " ".join(run)
        alias = f"x{len(extracts)}"
        extracts.append(ExtractSpec(alias=alias, cond_kind="contains", pattern=phrase))
        report.unbound.append(phrase)
        report.suggested_extracts.append(f"EXTRACT({alias}, 'contains:{phrase}')")

    if not projections:
        projections = [ProjField(FieldRef("doc_id"))]
    where: list = list(constraints) + list(extracts)
    stmt = SelectStmt(projections=projections, source="store", where=where)
    return stmt, report
