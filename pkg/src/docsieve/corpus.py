"""Corpus ingestion: JSON-Lines documents with stable identifiers.

Each line of a corpus file is ``{"doc_id": ..., "text": ..., "meta": {...}}``.
Byte spans of every line are recorded at load time so downstream components
(the EXTRACT operator in particular) can re-read raw text from the original
file instead of copying it into the annotation store.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .errors import DuplicateDocId, MalformedLine
from .tokenizer import token_count


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str
    source_meta: dict[str, str] = field(default_factory=dict)
    token_count: int = 0

    @staticmethod
    def make(doc_id: str, text: str, meta: dict[str, str] | None = None) -> "Document":
        return Document(
            doc_id=doc_id,
            text=text,
            source_meta=dict(meta or {}),
            token_count=token_count(text),
        )


@dataclass(frozen=True)
class TextSpan:
    """Byte span of one document's line inside its corpus file."""

    path: str
    offset: int
    length: int


class Corpus:
    """Immutable, ordered document collection keyed by doc_id."""

    def __init__(self, documents: list[Document], spans: dict[str, TextSpan] | None = None):
        self._docs = list(documents)
        self._by_id: dict[str, Document] = {}
        for doc in self._docs:
            if doc.doc_id in self._by_id:
                raise DuplicateDocId(doc.doc_id)
            self._by_id[doc.doc_id] = doc
        self.spans = dict(spans or {})

    def __len__(self) -> int:
        return len(self._docs)

    def __iter__(self) -> Iterator[Document]:
        return iter(self._docs)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._by_id

    def get(self, doc_id: str) -> Document:
        return self._by_id[doc_id]

    @property
    def doc_ids(self) -> list[str]:
        return [d.doc_id for d in self._docs]

    def fingerprint(self, doc_ids: list[str] | None = None) -> str:
        """SHA-256 over (doc_id, text) pairs in sorted doc_id order.

        Sorted order makes the fingerprint recomputable from any container
        that knows only the covered doc_ids (the annotation store does).
        """
        chosen = sorted(doc_ids) if doc_ids is not None else sorted(self._by_id)
        h = hashlib.sha256()
        for doc_id in chosen:
            h.update(doc_id.encode("utf-8"))
            h.update(b"\x00")
            h.update(self._by_id[doc_id].text.encode("utf-8"))
            h.update(b"\x01")
        return h.hexdigest()


def load_corpus(path: str | Path) -> Corpus:
    """Load a JSON-Lines corpus file.

    Blank lines are not allowed mid-file (they would shift byte accounting);
    a line that is not valid JSON, is not an object, or lacks the required
    string fields raises MalformedLine with its 1-based line number.
    """
    path = Path(path)
    docs: list[Document] = []
    spans: dict[str, TextSpan] = {}
    seen: set[str] = set()
    offset = 0
    with path.open("rb") as fh:
        for line_no, raw in enumerate(fh, start=1):
            length = len(raw)
            stripped = raw.strip()
            if not stripped:
                offset += length
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise MalformedLine(line_no, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise MalformedLine(line_no, "expected a JSON object")
            doc_id = obj.get("doc_id")
            text = obj.get("text")
            if not isinstance(doc_id, str) or not doc_id:
                raise MalformedLine(line_no, "missing or empty 'doc_id'")
            if not isinstance(text, str):
                raise MalformedLine(line_no, "missing 'text'")
            if doc_id in seen:
                raise DuplicateDocId(doc_id)
            seen.add(doc_id)
            meta = obj.get("meta") or {}
            if not isinstance(meta, dict):
                raise MalformedLine(line_no, "'meta' must be an object")
            docs.append(Document.make(doc_id, text, {str(k): str(v) for k, v in meta.items()}))
            spans[doc_id] = TextSpan(path=str(path), offset=offset, length=length)
            offset += length
    return Corpus(docs, spans)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus as JSON Lines (one object per document, corpus order)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for doc in corpus:
            obj: dict = {"doc_id": doc.doc_id, "text": doc.text}
            if doc.source_meta:
                obj["meta"] = doc.source_meta
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")


def read_span(span: TextSpan) -> str:
    """Re-read one document's text via its recorded byte span."""
    with open(span.path, "rb") as fh:
        fh.seek(span.offset)
        raw = fh.read(span.length)
    obj = json.loads(raw)
    return obj["text"]
