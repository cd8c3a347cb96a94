"""Hybrid annotation store: typed relational table + document store.

Fast-tier fields back a typed table (hash index for categorical columns,
sorted index for number/date columns); sem/detail fields live in a
document-oriented JSON store with an inverted token index over sem string
values. Everything is linked by doc_id. Stores are immutable after build;
persistence is five files (manifest.json, schema.json, fast.csv,
docs.jsonl, postings.jsonl) written to a temp dir and atomically swapped in.

Raw document text is not copied into the store: the manifest references the
original corpus JSONL by byte spans (or inlines texts for stores built from
in-memory corpora). Size accounting for the storage-ratio constraint counts
exactly fast.csv + docs.jsonl + postings.jsonl.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import STORE_FORMAT_VERSION
from .values import canonical_number, parse_date_value
from .annotate.runner import AnnotationBatch
from .corpus import Corpus, TextSpan, read_span
from .errors import (
    BuildError,
    CorruptStore,
    EmptyBatch,
    MissingDocument,
    MultiValueFastField,
    SchemaMismatch,
    StoreTypeError,
    UnknownColumn,
    UnknownField,
)
from .schema import Schema, schema_parse, schema_serialize
from .tokenizer import token_positions, tokenize

FAST_OPS = ("=", "!=", "<", "<=", ">", ">=", "IN")
SEM_MATCHES = ("equals", "contains_token", "phrase")


def _norm_string(value: str) -> str:
    return " ".join(value.split()).lower()


def coerce_fast_value(value: str, value_type: str) -> str:
    """Canonical stored form of a fast cell; raises StoreTypeError if unparseable."""
    if value_type == "number":
        canon = canonical_number(value)
        if canon is None:
            raise StoreTypeError(f"not a number: {value!r}")
        return canon
    if value_type == "date":
        iso = parse_date_value(value)
        if iso is None:
            raise StoreTypeError(f"not a date: {value!r}")
        return iso
    return _norm_string(value)


def sort_key_for(value: str, value_type: str):
    """Comparable key for range predicates (numbers numeric, dates ISO)."""
    if value_type == "number":
        return float(value)
    return value


@dataclass
class FastTable:
    columns: list  # FieldSpec, sorted by name
    rows: dict[str, dict[str, str | None]]
    hash_index: dict[str, dict[str, list[str]]] = field(default_factory=dict)
    sorted_index: dict[str, list[tuple[object, str]]] = field(default_factory=dict)

    def column(self, name: str):
        for c in self.columns:
            if c.name == name:
                return c
        raise UnknownColumn(name)

    def build_indexes(self) -> None:
        self.hash_index = {}
        self.sorted_index = {}
        for col in self.columns:
            eq: dict[str, list[str]] = {}
            ordered: list[tuple[object, str]] = []
            for doc_id in sorted(self.rows):
                value = self.rows[doc_id].get(col.name)
                if value is None:
                    continue
                eq.setdefault(value, []).append(doc_id)
                if col.value_type in ("number", "date"):
                    ordered.append((sort_key_for(value, col.value_type), doc_id))
            ordered.sort()
            self.hash_index[col.name] = eq
            self.sorted_index[col.name] = ordered


@dataclass
class DocStore:
    objects: dict[str, dict[str, list[str]]]
    postings: dict[str, dict[str, list[str]]] = field(default_factory=dict)
    equals_index: dict[str, dict[str, list[str]]] = field(default_factory=dict)

    def build_indexes(self, sem_fields: list[str]) -> None:
        self.postings = {name: {} for name in sem_fields}
        self.equals_index = {name: {} for name in sem_fields}
        for doc_id in sorted(self.objects):
            values = self.objects[doc_id]
            for name in sem_fields:
                for value in values.get(name, []):
                    normalized = _norm_string(value)
                    eq = self.equals_index[name].setdefault(normalized, [])
                    if not eq or eq[-1] != doc_id:
                        eq.append(doc_id)
                    for token in set(tokenize(value)):
                        lst = self.postings[name].setdefault(token, [])
                        if not lst or lst[-1] != doc_id:
                            lst.append(doc_id)


@dataclass
class TextSource:
    """Where raw document text lives: corpus byte spans or inline copies."""

    spans: dict[str, TextSpan] = field(default_factory=dict)
    inline: dict[str, str] = field(default_factory=dict)

    def get(self, doc_id: str) -> str:
        if doc_id in self.inline:
            return self.inline[doc_id]
        if doc_id in self.spans:
            return read_span(self.spans[doc_id])
        raise KeyError(doc_id)

    def to_manifest(self, store_dir: Path | None) -> dict:
        if self.spans:
            paths = sorted({s.path for s in self.spans.values()})
            rel: dict[str, str] = {}
            for p in paths:
                if store_dir is not None:
                    try:
                        rel[p] = os.path.relpath(p, store_dir)
                    except ValueError:
                        rel[p] = os.path.abspath(p)
                else:
                    rel[p] = os.path.abspath(p)
            return {
                "kind": "spans",
                "files": [rel[p] for p in paths],
                "spans": {
                    doc_id: [paths.index(s.path), s.offset, s.length]
                    for doc_id, s in sorted(self.spans.items())
                },
            }
        return {"kind": "inline", "texts": dict(sorted(self.inline.items()))}

    @staticmethod
    def from_manifest(obj: dict, store_dir: Path) -> "TextSource":
        if obj.get("kind") == "inline":
            return TextSource(inline=dict(obj.get("texts", {})))
        files = [
            p if os.path.isabs(p) else os.path.normpath(os.path.join(store_dir, p))
            for p in obj.get("files", [])
        ]
        spans = {}
        for doc_id, (fidx, offset, length) in obj.get("spans", {}).items():
            spans[doc_id] = TextSpan(path=files[fidx], offset=offset, length=length)
        return TextSource(spans=spans)


def _resolve_built_at(explicit: str | None, corpus_path: str | None) -> str:
    """Deterministic build stamp: explicit value, SOURCE_DATE_EPOCH, corpus
    file mtime, then wall clock as the last resort."""
    if explicit:
        return explicit
    sde = os.environ.get("SOURCE_DATE_EPOCH")
    if sde and sde.isdigit():
        return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(int(sde)))
    if corpus_path and os.path.exists(corpus_path):
        return time.strftime(
            "%Y-%m-%dT%H:%M:%SZ", time.gmtime(int(os.path.getmtime(corpus_path)))
        )
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


@dataclass
class AnnotationStore:
    schema: Schema
    fast: FastTable
    docs: DocStore
    text_source: TextSource
    manifest: dict

    @property
    def doc_ids(self) -> list[str]:
        return sorted(self.fast.rows)

    def __len__(self) -> int:
        return len(self.fast.rows)

    def raw_text(self, doc_id: str) -> str:
        return self.text_source.get(doc_id)

    def sem_field_names(self) -> list[str]:
        return [f.name for f in self.schema.fields if f.tier == "sem"]

    def annotation_values(self, doc_id: str) -> dict[str, list[str]]:
        """All field values for one document (fast cells as 0/1-element lists)."""
        out: dict[str, list[str]] = {}
        row = self.fast.rows.get(doc_id)
        if row is None:
            raise MissingDocument(doc_id)
        for col in self.fast.columns:
            value = row.get(col.name)
            out[col.name] = [value] if value is not None else []
        for name, values in self.docs.objects.get(doc_id, {}).items():
            out[name] = list(values)
        return out

    # --- fast lookups -----------------------------------------------------

    def lookup_fast(self, column: str, op: str, value) -> list[str]:
        col = self.fast.column(column)
        if op not in FAST_OPS:
            raise StoreTypeError(f"unsupported operator {op!r}")
        if op == "IN":
            if not isinstance(value, (list, tuple)):
                raise StoreTypeError("IN requires a list of values")
            hits: set[str] = set()
            for v in value:
                hits.update(self._eq_ids(col, v))
            return sorted(hits)
        if op == "=":
            return list(self._eq_ids(col, value))
        if op == "!=":
            coerced = self._coerce(col, value)
            eq = set(self.fast.hash_index[col.name].get(coerced, []))
            # Null cells never satisfy any comparison, != included.
            non_null = {
                doc_id
                for doc_id, row in self.fast.rows.items()
                if row.get(col.name) is not None
            }
            return sorted(non_null - eq)
        # range operators
        if col.value_type not in ("number", "date"):
            raise StoreTypeError(f"range operator {op!r} needs a number/date column")
        coerced = self._coerce(col, value)
        key = sort_key_for(coerced, col.value_type)
        ordered = self.fast.sorted_index[col.name]
        keys = [k for k, _ in ordered]
        if op == "<":
            idx = bisect.bisect_left(keys, key)
            chosen = ordered[:idx]
        elif op == "<=":
            idx = bisect.bisect_right(keys, key)
            chosen = ordered[:idx]
        elif op == ">":
            idx = bisect.bisect_right(keys, key)
            chosen = ordered[idx:]
        else:  # >=
            idx = bisect.bisect_left(keys, key)
            chosen = ordered[idx:]
        return sorted(doc_id for _, doc_id in chosen)

    def _coerce(self, col, value) -> str:
        return coerce_fast_value(str(value), col.value_type)

    def _eq_ids(self, col, value) -> list[str]:
        coerced = self._coerce(col, value)
        return self.fast.hash_index[col.name].get(coerced, [])

    # --- sem lookups --------------------------------------------------------

    def sem_non_null(self, field_name: str) -> list[str]:
        """Sorted doc_ids holding at least one value for a sem/detail field."""
        return sorted(
            doc_id
            for doc_id, values in self.docs.objects.items()
            if values.get(field_name)
        )

    def lookup_sem(self, field_name: str, match: str, value: str) -> list[str]:
        if field_name not in self.docs.postings:
            raise UnknownField(field_name)
        if match not in SEM_MATCHES:
            raise StoreTypeError(f"unsupported sem match {match!r}")
        if match == "equals":
            return list(self.docs.equals_index[field_name].get(_norm_string(value), []))
        tokens = tokenize(value)
        if not tokens:
            return []
        postings = self.docs.postings[field_name]
        lists = [postings.get(tok, []) for tok in tokens]
        if any(not lst for lst in lists):
            return []
        from ._kernels import intersect_sorted

        candidates = lists[0]
        for other in lists[1:]:
            candidates = intersect_sorted(candidates, other)
        if match == "contains_token" or len(tokens) == 1:
            return list(candidates)
        verified = []
        for doc_id in candidates:
            for stored in self.docs.objects[doc_id].get(field_name, []):
                if token_positions(tokenize(stored), tokens):
                    verified.append(doc_id)
                    break
        return verified

    # --- selectivity estimates (exact histograms) ---------------------------

    def est_fast_selectivity(self, column: str, op: str, value) -> float:
        n = len(self) or 1
        col = self.fast.column(column)
        try:
            if op == "=":
                return len(self._eq_ids(col, value)) / n
            if op == "IN":
                return min(1.0, sum(len(self._eq_ids(col, v)) for v in value) / n)
            if op == "!=":
                eq = len(self._eq_ids(col, value))
                non_null = sum(
                    1 for row in self.fast.rows.values() if row.get(col.name) is not None
                )
                return (non_null - eq) / n
            coerced = self._coerce(col, value)
            key = sort_key_for(coerced, col.value_type)
            keys = [k for k, _ in self.fast.sorted_index[col.name]]
            if op == "<":
                return bisect.bisect_left(keys, key) / n
            if op == "<=":
                return bisect.bisect_right(keys, key) / n
            if op == ">":
                return (len(keys) - bisect.bisect_right(keys, key)) / n
            return (len(keys) - bisect.bisect_left(keys, key)) / n
        except StoreTypeError:
            return 1.0

    def est_sem_selectivity(self, field_name: str, match: str, value: str) -> float:
        n = len(self) or 1
        if field_name not in self.docs.postings:
            return 1.0
        if match == "equals":
            return len(self.docs.equals_index[field_name].get(_norm_string(value), [])) / n
        tokens = tokenize(value)
        if not tokens:
            return 0.0
        return min(len(self.docs.postings[field_name].get(t, [])) for t in tokens) / n

    # --- size accounting ----------------------------------------------------

    def data_file_texts(self) -> dict[str, str]:
        return {
            "fast.csv": serialize_fast_csv(self),
            "docs.jsonl": serialize_docs_jsonl(self),
            "postings.jsonl": serialize_postings_jsonl(self),
        }

    def size_bytes(self) -> int:
        return sum(len(text.encode("utf-8")) for text in self.data_file_texts().values())


# --- building ----------------------------------------------------------------


def build_store(
    batch: AnnotationBatch,
    schema: Schema,
    corpus: Corpus,
    built_at: str | None = None,
) -> AnnotationStore:
    """Materialize an annotation batch as a hybrid store."""
    if batch.schema_id != schema.schema_id:
        raise SchemaMismatch(f"batch {batch.schema_id!r} vs schema {schema.schema_id!r}")
    if not batch.records:
        raise EmptyBatch("batch has no records")
    seen: set[str] = set()
    for rec in batch.records:
        if rec.doc_id not in corpus:
            raise MissingDocument(rec.doc_id)
        if rec.doc_id in seen:
            raise BuildError(f"duplicate record for doc {rec.doc_id!r}")
        seen.add(rec.doc_id)

    fast_fields = sorted(schema.tier_fields("fast"), key=lambda f: f.name)
    other_fields = sorted(
        (f for f in schema.fields if f.tier != "fast"), key=lambda f: f.name
    )

    rows: dict[str, dict[str, str | None]] = {}
    objects: dict[str, dict[str, list[str]]] = {}
    for rec in batch.records:
        row: dict[str, str | None] = {}
        for f in fast_fields:
            values = rec.values.get(f.name, [])
            if len(values) > 1:
                raise MultiValueFastField(f.name, rec.doc_id)
            if values:
                try:
                    row[f.name] = coerce_fast_value(values[0], f.value_type)
                except StoreTypeError as exc:
                    raise BuildError(
                        f"doc {rec.doc_id!r} field {f.name!r}: {exc}"
                    ) from exc
            else:
                row[f.name] = None
        rows[rec.doc_id] = row
        objects[rec.doc_id] = {
            f.name: list(rec.values.get(f.name, [])) for f in other_fields
        }

    fast = FastTable(columns=fast_fields, rows=rows)
    fast.build_indexes()
    docs = DocStore(objects=objects)
    docs.build_indexes([f.name for f in schema.fields if f.tier == "sem"])

    spans = {doc_id: corpus.spans[doc_id] for doc_id in rows if doc_id in corpus.spans}
    if len(spans) == len(rows):
        text_source = TextSource(spans=spans)
        corpus_path = corpus.spans[batch.records[0].doc_id].path
    else:
        text_source = TextSource(
            inline={doc_id: corpus.get(doc_id).text for doc_id in rows}
        )
        corpus_path = None

    manifest = {
        "schema_id": schema.schema_id,
        "corpus_sha256": corpus.fingerprint(sorted(rows)),
        "built_at": _resolve_built_at(built_at, corpus_path),
        "doc_count": len(rows),
        "format_version": STORE_FORMAT_VERSION,
    }
    return AnnotationStore(
        schema=schema, fast=fast, docs=docs, text_source=text_source, manifest=manifest
    )


# --- serialization -------------------------------------------------------------


def serialize_fast_csv(store: AnnotationStore) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["doc_id:string"] + [
        f"{c.name}:{c.value_type}" for c in store.fast.columns
    ]
    writer.writerow(header)
    for doc_id in sorted(store.fast.rows):
        row = store.fast.rows[doc_id]
        writer.writerow(
            [doc_id] + [row.get(c.name) or "" for c in store.fast.columns]
        )
    return buf.getvalue()


def serialize_docs_jsonl(store: AnnotationStore) -> str:
    lines = []
    for doc_id in sorted(store.docs.objects):
        lines.append(
            json.dumps(
                {"doc_id": doc_id, "values": store.docs.objects[doc_id]},
                sort_keys=True,
                ensure_ascii=False,
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


def serialize_postings_jsonl(store: AnnotationStore) -> str:
    lines = []
    for field_name in sorted(store.docs.postings):
        for token in sorted(store.docs.postings[field_name]):
            lines.append(
                json.dumps(
                    {
                        "field": field_name,
                        "token": token,
                        "docs": store.docs.postings[field_name][token],
                    },
                    sort_keys=True,
                    ensure_ascii=False,
                )
            )
    return "\n".join(lines) + ("\n" if lines else "")


def persist(store: AnnotationStore, directory: str | Path) -> Path:
    """Write the store to ``directory`` atomically (temp dir + rename)."""
    directory = Path(directory)
    parent = directory.parent
    parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(str(directory) + ".tmp")
    if tmp.exists():
        _rmtree(tmp)
    tmp.mkdir(parents=True)

    manifest = dict(store.manifest)
    manifest["text_source"] = store.text_source.to_manifest(directory)
    (tmp / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    (tmp / "schema.json").write_text(schema_serialize(store.schema), encoding="utf-8")
    for name, text in store.data_file_texts().items():
        (tmp / name).write_text(text, encoding="utf-8")

    if directory.exists():
        old = Path(str(directory) + ".old")
        if old.exists():
            _rmtree(old)
        os.rename(directory, old)
        os.rename(tmp, directory)
        _rmtree(old)
    else:
        os.rename(tmp, directory)
    return directory


def _rmtree(path: Path) -> None:
    for child in sorted(path.rglob("*"), reverse=True):
        if child.is_dir():
            child.rmdir()
        else:
            child.unlink()
    path.rmdir()


def _parse_typed_header(header: list[str], file: str) -> list[tuple[str, str]]:
    cols = []
    for raw in header:
        if ":" not in raw:
            raise CorruptStore(f"untyped column {raw!r}", file=file)
        name, value_type = raw.rsplit(":", 1)
        cols.append((name, value_type))
    return cols


def open_store(directory: str | Path, strict: bool = False) -> AnnotationStore:
    """Open a persisted store; ``strict`` re-verifies the corpus fingerprint."""
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise CorruptStore("missing manifest.json", file=str(manifest_path))
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorruptStore(f"manifest: {exc.msg}", file=str(manifest_path)) from exc

    schema = schema_parse((directory / "schema.json").read_text(encoding="utf-8"))
    if schema.schema_id != manifest.get("schema_id"):
        raise CorruptStore("schema_id mismatch between manifest and schema.json")

    fast_path = directory / "fast.csv"
    fast_fields = sorted(schema.tier_fields("fast"), key=lambda f: f.name)
    rows: dict[str, dict[str, str | None]] = {}
    with fast_path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration as exc:
            raise CorruptStore("empty fast.csv", file=str(fast_path)) from exc
        cols = _parse_typed_header(header, str(fast_path))
        expected = [("doc_id", "string")] + [(f.name, f.value_type) for f in fast_fields]
        if cols != expected:
            raise CorruptStore(
                f"fast.csv header {cols} != schema columns {expected}", file=str(fast_path)
            )
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(cols):
                raise CorruptStore(
                    f"row width {len(row)} != {len(cols)}", file=str(fast_path), offset=line_no
                )
            doc_id = row[0]
            rows[doc_id] = {
                name: (cell if cell != "" else None)
                for (name, _), cell in zip(cols[1:], row[1:])
            }

    docs_path = directory / "docs.jsonl"
    objects: dict[str, dict[str, list[str]]] = {}
    with docs_path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorruptStore(
                    f"docs.jsonl: {exc.msg}", file=str(docs_path), offset=line_no
                ) from exc
            objects[obj["doc_id"]] = {k: list(v) for k, v in obj["values"].items()}

    postings_path = directory / "postings.jsonl"
    postings: dict[str, dict[str, list[str]]] = {
        f.name: {} for f in schema.fields if f.tier == "sem"
    }
    with postings_path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorruptStore(
                    f"postings.jsonl: {exc.msg}", file=str(postings_path), offset=line_no
                ) from exc
            docs_list = obj.get("docs", [])
            if docs_list != sorted(set(docs_list)):
                raise CorruptStore(
                    "posting list not sorted/deduplicated",
                    file=str(postings_path),
                    offset=line_no,
                )
            for d in docs_list:
                if d not in objects:
                    raise CorruptStore(
                        f"posting references unknown doc {d!r}",
                        file=str(postings_path),
                        offset=line_no,
                    )
            postings.setdefault(obj["field"], {})[obj["token"]] = docs_list

    if set(rows) != set(objects):
        raise CorruptStore("fast table and doc store cover different doc_id sets")
    if len(rows) != manifest.get("doc_count"):
        raise CorruptStore(
            f"doc_count {manifest.get('doc_count')} != {len(rows)} rows present"
        )

    fast = FastTable(columns=fast_fields, rows=rows)
    fast.build_indexes()
    doc_store = DocStore(objects=objects, postings=postings)
    # equals index is derived, rebuild it (postings come from disk verbatim).
    doc_store.equals_index = {}
    sem_names = [f.name for f in schema.fields if f.tier == "sem"]
    rebuilt = DocStore(objects=objects)
    rebuilt.build_indexes(sem_names)
    doc_store.equals_index = rebuilt.equals_index

    text_source = TextSource.from_manifest(manifest.get("text_source", {}), directory)
    store = AnnotationStore(
        schema=schema,
        fast=fast,
        docs=doc_store,
        text_source=text_source,
        manifest={k: v for k, v in manifest.items() if k != "text_source"},
    )
    if strict:
        _verify_fingerprint(store, manifest)
    return store


def _verify_fingerprint(store: AnnotationStore, manifest: dict) -> None:
    import hashlib

    h = hashlib.sha256()
    try:
        for doc_id in store.doc_ids:
            h.update(doc_id.encode("utf-8"))
            h.update(b"\x00")
            h.update(store.raw_text(doc_id).encode("utf-8"))
            h.update(b"\x01")
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise CorruptStore(f"fingerprint: cannot re-read corpus text ({exc})") from exc
    if h.hexdigest() != manifest.get("corpus_sha256"):
        raise CorruptStore("fingerprint: corpus content changed since build")


def store_dir_hash(directory: str | Path) -> str:
    """SHA-256 over every store file (sorted by name); used by determinism checks."""
    import hashlib

    directory = Path(directory)
    h = hashlib.sha256()
    for path in sorted(directory.iterdir()):
        if path.is_file():
            h.update(path.name.encode("utf-8"))
            h.update(b"\x00")
            h.update(path.read_bytes())
            h.update(b"\x01")
    return h.hexdigest()
