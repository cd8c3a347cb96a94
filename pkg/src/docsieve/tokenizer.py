"""Deterministic corpus tokenizer.

One tokenizer is used everywhere (token counts, embeddings, posting lists,
query-side text matching) so that index-time and query-time views of a text
never disagree. Rules: lowercase, split on whitespace and punctuation,
numbers survive as single tokens (including decimal points and digit-group
commas, so "12,500.00" is one token).
"""

from __future__ import annotations

import re

# A token is either a number (digits, optionally extended by , or . digit
# groups) or a run of Unicode letters. Everything else is a separator.
_TOKEN_RE = re.compile(r"\d+(?:[.,]\d+)*|[^\W\d_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Split ``text`` into lowercase word/number tokens."""
    return _TOKEN_RE.findall(text.lower())


def tokenize_cased(text: str) -> list[str]:
    """Tokenize without case folding (case-sensitive matching paths only)."""
    return _TOKEN_RE.findall(text)


def token_count(text: str) -> int:
    return len(tokenize(text))


def token_positions(tokens: list[str], phrase: list[str]) -> list[int]:
    """Start indices where ``phrase`` occurs as a contiguous token run."""
    if not phrase or len(phrase) > len(tokens):
        return []
    first = phrase[0]
    n = len(phrase)
    out = []
    for i, tok in enumerate(tokens[: len(tokens) - n + 1]):
        if tok == first and tokens[i : i + n] == phrase:
            out.append(i)
    return out
