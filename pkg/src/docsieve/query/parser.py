"""Recursive-descent parser for the query dialect.

Keywords are case-insensitive; identifiers fold to lowercase; string
literals are single-quoted with '' escaping. Syntax errors carry the
1-based line/column of the offending token and what was expected there.

    script    := statement (";" statement)* ;
    statement := with_clause? select ;
    with_clause := "WITH" name "AS" "(" select ")" ("," name "AS" "(" select ")")* ;
    select    := "SELECT" proj ("," proj)* "FROM" source (join)*
                 ("WHERE" conj)? ("GROUP" "BY" fields)? ("ORDER" "BY" orderitem)?
                 ("LIMIT" int)? ;
    join      := "JOIN" source "ON" expr "=" expr ;
    conj      := pred ("AND" pred)* ;
    pred      := field op literal | "EXTRACT" "(" alias "," "'" cond "'" ")"
               | alias op literal | "(" pred ("OR" pred)* ")" ;
    cond      := ("regex:" | "contains:" | "near:") payload ;
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import QuerySemanticError, QuerySyntaxError
from .ast import (
    AGGREGATE_FNS,
    ExtractSpec,
    FieldRef,
    Join,
    OrGroup,
    ProjAggregate,
    ProjField,
    SchemaPred,
    SelectStmt,
    Statement,
)

KEYWORDS = {
    "select", "from", "where", "join", "on", "group", "by", "order",
    "limit", "with", "as", "and", "or", "in", "extract", "asc", "desc",
}

_TOKEN_SPEC = [
    ("WS", r"[ \t\r\n]+"),
    ("NUMBER", r"\d+(?:\.\d+)?"),
    ("STRING", r"'(?:[^']|'')*'"),
    ("NEQ", r"!=|<>"),
    ("LE", r"<="),
    ("GE", r">="),
    ("LT", r"<"),
    ("GT", r">"),
    ("EQ", r"="),
    ("LPAREN", r"\("),
    ("RPAREN", r"\)"),
    ("COMMA", r","),
    ("SEMI", r";"),
    ("DOT", r"\."),
    ("STAR", r"\*"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
]
_MASTER_RE = re.compile("|".join(f"(?P<{n}>{p})" for n, p in _TOKEN_SPEC))

_OP_TOKENS = {"EQ": "=", "NEQ": "!=", "LT": "<", "LE": "<=", "GT": ">", "GE": ">="}


@dataclass(frozen=True)
class Token:
    kind: str  # token kind, or "KW" for keywords
    text: str
    line: int
    col: int


def lex(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _MASTER_RE.match(text, pos)
        if m is None:
            raise QuerySyntaxError(line, col, "a valid token", text[pos])
        kind = m.lastgroup or ""
        value = m.group(0)
        if kind != "WS":
            if kind == "IDENT" and value.lower() in KEYWORDS:
                tokens.append(Token("KW", value.lower(), line, col))
            elif kind == "IDENT":
                tokens.append(Token("IDENT", value.lower(), line, col))
            else:
                tokens.append(Token(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    tokens.append(Token("EOF", "", line, col))
    return tokens


def _unquote(raw: str) -> str:
    return raw[1:-1].replace("''", "'")


class Parser:
    def __init__(self, text: str):
        self.tokens = lex(text)
        self.pos = 0

    # --- token helpers ------------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at_kw(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "KW" and tok.text in words

    def expect_kw(self, word: str) -> Token:
        tok = self.peek()
        if tok.kind == "KW" and tok.text == word:
            return self.advance()
        raise QuerySyntaxError(tok.line, tok.col, word.upper(), tok.text)

    def expect(self, kind: str, expected: str) -> Token:
        tok = self.peek()
        if tok.kind == kind:
            return self.advance()
        raise QuerySyntaxError(tok.line, tok.col, expected, tok.text)

    # --- grammar --------------------------------------------------------------

    def parse_script(self) -> list[Statement]:
        statements = [self.parse_statement()]
        while self.peek().kind == "SEMI":
            self.advance()
            if self.peek().kind == "EOF":
                break
            statements.append(self.parse_statement())
        tok = self.peek()
        if tok.kind != "EOF":
            raise QuerySyntaxError(tok.line, tok.col, "';' or end of input", tok.text)
        return statements

    def parse_statement(self) -> Statement:
        withs: list[tuple[str, SelectStmt]] = []
        if self.at_kw("with"):
            self.advance()
            while True:
                name = self.expect("IDENT", "temp table name").text
                self.expect_kw("as")
                self.expect("LPAREN", "'('")
                inner = self.parse_select()
                self.expect("RPAREN", "')'")
                withs.append((name, inner))
                if self.peek().kind == "COMMA":
                    self.advance()
                    continue
                break
        select = self.parse_select()
        return Statement(withs=withs, select=select)

    def parse_select(self) -> SelectStmt:
        self.expect_kw("select")
        projections = [self.parse_projection()]
        while self.peek().kind == "COMMA":
            self.advance()
            projections.append(self.parse_projection())
        self.expect_kw("from")
        source = self.expect("IDENT", "source name").text
        joins: list[Join] = []
        while self.at_kw("join"):
            self.advance()
            join_source = self.expect("IDENT", "join source name").text
            self.expect_kw("on")
            left = self.parse_field_ref()
            self.expect("EQ", "'='")
            right = self.parse_field_ref()
            joins.append(Join(source=join_source, left=left, right=right))
        where: list = []
        if self.at_kw("where"):
            self.advance()
            where = self.parse_conjunction()
        group_by: list[FieldRef] = []
        if self.at_kw("group"):
            self.advance()
            self.expect_kw("by")
            group_by.append(self.parse_field_ref())
            while self.peek().kind == "COMMA":
                self.advance()
                group_by.append(self.parse_field_ref())
        order_by: list[tuple[FieldRef, bool]] = []
        if self.at_kw("order"):
            self.advance()
            self.expect_kw("by")
            while True:
                ref = self.parse_field_ref()
                desc = False
                if self.at_kw("asc", "desc"):
                    desc = self.advance().text == "desc"
                order_by.append((ref, desc))
                if self.peek().kind == "COMMA":
                    self.advance()
                    continue
                break
        limit = None
        if self.at_kw("limit"):
            self.advance()
            tok = self.expect("NUMBER", "an integer limit")
            if "." in tok.text:
                raise QuerySyntaxError(tok.line, tok.col, "an integer limit", tok.text)
            limit = int(tok.text)
        stmt = SelectStmt(
            projections=projections,
            source=source,
            joins=joins,
            where=where,
            group_by=group_by,
            order_by=order_by,
            limit=limit,
        )
        _fold_alias_comparisons(stmt)
        return stmt

    def parse_projection(self):
        tok = self.peek()
        if tok.kind == "IDENT" and tok.text in AGGREGATE_FNS and self.peek(1).kind == "LPAREN":
            fn = self.advance().text
            self.advance()  # (
            if self.peek().kind == "STAR":
                self.advance()
                arg = None
            else:
                arg = self.parse_field_ref()
            self.expect("RPAREN", "')'")
            return ProjAggregate(fn=fn, arg=arg)
        return ProjField(ref=self.parse_field_ref())

    def parse_field_ref(self) -> FieldRef:
        first = self.expect("IDENT", "a field name").text
        if self.peek().kind == "DOT":
            self.advance()
            second = self.expect("IDENT", "a field name").text
            return FieldRef(name=second, source=first)
        return FieldRef(name=first)

    def parse_conjunction(self) -> list:
        preds = [self.parse_predicate()]
        while self.at_kw("and"):
            self.advance()
            preds.append(self.parse_predicate())
        return preds

    def parse_predicate(self):
        tok = self.peek()
        if tok.kind == "LPAREN":
            self.advance()
            members = [self.parse_predicate()]
            while self.at_kw("or"):
                self.advance()
                members.append(self.parse_predicate())
            self.expect("RPAREN", "')'")
            if len(members) == 1:
                return members[0]
            flattened = []
            for m in members:
                if isinstance(m, OrGroup):
                    flattened.extend(m.members)
                else:
                    flattened.append(m)
            return OrGroup(members=tuple(flattened))
        if self.at_kw("extract"):
            return self.parse_extract()
        ref = self.parse_field_ref()
        op_tok = self.peek()
        if op_tok.kind in _OP_TOKENS:
            self.advance()
            value = self.parse_literal()
            return SchemaPred(field=ref, op=_OP_TOKENS[op_tok.kind], value=value)
        if op_tok.kind == "KW" and op_tok.text == "in":
            self.advance()
            self.expect("LPAREN", "'('")
            values: list[object] = []
            if self.peek().kind != "RPAREN":
                values.append(self.parse_literal())
                while self.peek().kind == "COMMA":
                    self.advance()
                    values.append(self.parse_literal())
            self.expect("RPAREN", "')'")
            return SchemaPred(field=ref, op="IN", value=values)
        raise QuerySyntaxError(
            op_tok.line, op_tok.col, "a comparison operator", op_tok.text
        )

    def parse_extract(self) -> ExtractSpec:
        self.expect_kw("extract")
        self.expect("LPAREN", "'('")
        alias_tok = self.expect("IDENT", "an extract alias")
        self.expect("COMMA", "','")
        cond_tok = self.expect("STRING", "a quoted extract condition")
        self.expect("RPAREN", "')'")
        cond = _unquote(cond_tok.text)
        try:
            spec = _parse_extract_cond(alias_tok.text, cond)
        except ValueError as exc:
            raise QuerySyntaxError(
                cond_tok.line, cond_tok.col, f"a valid extract condition ({exc})", cond
            ) from exc
        return spec

    def parse_literal(self):
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.advance()
            return float(tok.text) if "." in tok.text else int(tok.text)
        if tok.kind == "STRING":
            self.advance()
            return _unquote(tok.text)
        raise QuerySyntaxError(tok.line, tok.col, "a literal", tok.text)


def _parse_extract_cond(alias: str, cond: str) -> ExtractSpec:
    if cond.startswith("regex:"):
        return ExtractSpec(alias=alias, cond_kind="regex", pattern=cond[len("regex:"):])
    if cond.startswith("contains:"):
        payload = cond[len("contains:"):]
        if not payload:
            raise ValueError("contains payload is empty")
        return ExtractSpec(alias=alias, cond_kind="contains", pattern=payload)
    if cond.startswith("near:"):
        parts = cond[len("near:"):].split(",")
        if len(parts) != 3:
            raise ValueError("near payload must be termA,termB,window")
        term_a, term_b, raw_window = (p.strip() for p in parts)
        if not term_a or not term_b:
            raise ValueError("near terms must be non-empty")
        try:
            window = int(raw_window)
        except ValueError as exc:
            raise ValueError("near window must be an integer") from exc
        return ExtractSpec(
            alias=alias, cond_kind="near", near_terms=(term_a, term_b), window=window
        )
    raise ValueError("condition must start with regex:, contains: or near:")


def _fold_alias_comparisons(stmt: SelectStmt) -> None:
    """Rewrite ``alias op literal`` conjuncts into their EXTRACT's value_cmp."""
    aliases = stmt.extract_aliases()
    if not aliases:
        return
    folded: list = []
    cmp_by_alias: dict[str, tuple[str, object]] = {}
    for pred in stmt.where:
        if (
            isinstance(pred, SchemaPred)
            and pred.field.source is None
            and pred.field.name in aliases
        ):
            if pred.field.name in cmp_by_alias:
                raise QuerySemanticError(
                    f"multiple comparisons for extract alias {pred.field.name!r}"
                )
            if pred.op == "IN":
                raise QuerySemanticError("IN is not supported on extract aliases")
            cmp_by_alias[pred.field.name] = (pred.op, pred.value)
            continue
        folded.append(pred)
    if not cmp_by_alias:
        return
    rewritten: list = []
    for pred in folded:
        if isinstance(pred, ExtractSpec) and pred.alias in cmp_by_alias:
            if pred.value_cmp is not None:
                raise QuerySemanticError(
                    f"multiple comparisons for extract alias {pred.alias!r}"
                )
            rewritten.append(
                ExtractSpec(
                    alias=pred.alias,
                    cond_kind=pred.cond_kind,
                    pattern=pred.pattern,
                    near_terms=pred.near_terms,
                    window=pred.window,
                    value_cmp=cmp_by_alias.pop(pred.alias),
                )
            )
        else:
            rewritten.append(pred)
    if cmp_by_alias:
        name = sorted(cmp_by_alias)[0]
        raise QuerySemanticError(
            f"comparison on extract alias {name!r} requires its EXTRACT as a "
            "top-level conjunct"
        )
    stmt.where = rewritten


def parse_query(text: str) -> Statement:
    """Parse one statement (with optional WITH clause)."""
    parser = Parser(text)
    statements = parser.parse_script()
    if len(statements) != 1:
        tok = parser.tokens[0]
        raise QuerySyntaxError(tok.line, tok.col, "a single statement", "script")
    return statements[0]


def parse_script(text: str) -> list[Statement]:
    return Parser(text).parse_script()
