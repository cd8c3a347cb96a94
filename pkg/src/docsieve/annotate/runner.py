"""Document annotation: populate schema fields per document.

Annotation is per-document local and deterministic for built-in extractors,
so batches are reproducible regardless of parallelism. Timing is recorded
on records for cost estimation but deliberately excluded from the canonical
batch serialization.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..corpus import Corpus, Document
from ..errors import ExtractorMissing
from ..schema import Schema
from .extractors import (
    MAX_VALUES_PER_FIELD,
    CompiledExtractor,
    ExtractorRegistry,
    canonical_number,
    parse_date_value,
)


@dataclass
class AnnotationRecord:
    doc_id: str
    values: dict[str, list[str]]
    annotator_id: str
    elapsed_seconds: float = 0.0
    warnings: list[str] = field(default_factory=list)

    def is_null(self, field_name: str) -> bool:
        return not self.values.get(field_name)

    def populated_fraction(self) -> float:
        if not self.values:
            return 0.0
        hit = sum(1 for v in self.values.values() if v)
        return hit / len(self.values)


@dataclass
class AnnotationBatch:
    schema_id: str
    records: list[AnnotationRecord]
    failures: list[tuple[str, str]] = field(default_factory=list)  # (doc_id, reason)

    def record_for(self, doc_id: str) -> AnnotationRecord:
        for rec in self.records:
            if rec.doc_id == doc_id:
                return rec
        raise KeyError(doc_id)

    def to_jsonl(self) -> str:
        """Canonical serialization: header line + one record per document.

        Timing and annotator identity are volatile and stay out of this form
        so equal annotation results serialize byte-identically.
        """
        lines = [json.dumps({"schema_id": self.schema_id}, sort_keys=True)]
        for rec in self.records:
            lines.append(
                json.dumps(
                    {"doc_id": rec.doc_id, "values": rec.values},
                    sort_keys=True,
                    ensure_ascii=False,
                )
            )
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_jsonl(text: str, annotator_id: str = "loaded") -> "AnnotationBatch":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty batch serialization")
        header = json.loads(lines[0])
        records = []
        for ln in lines[1:]:
            obj = json.loads(ln)
            records.append(
                AnnotationRecord(
                    doc_id=obj["doc_id"],
                    values={k: list(v) for k, v in obj["values"].items()},
                    annotator_id=annotator_id,
                )
            )
        return AnnotationBatch(schema_id=header["schema_id"], records=records)


def _validate_value(raw: str, value_type: str, day_first: bool,
                    warnings: list[str], field_name: str) -> str | None:
    if value_type == "date":
        iso = parse_date_value(raw, day_first)
        if iso is None:
            warnings.append(f"{field_name}: unparseable date {raw!r} dropped")
        return iso
    if value_type == "number":
        canon = canonical_number(raw)
        if canon is None:
            # The raw capture may bury the amount in prose; try a scan.
            from .extractors import find_numbers

            found = find_numbers(raw)
            canon = found[0][1] if found else None
        if canon is None:
            warnings.append(f"{field_name}: unparseable number {raw!r} dropped")
        return canon
    return raw


def resolve_extractors(schema: Schema, registry: ExtractorRegistry) -> dict[str, CompiledExtractor]:
    """Fail-fast resolution of every field's extractor."""
    out = {}
    for f in schema.fields:
        out[f.name] = registry.resolve(f.name, f.value_type, f.extraction_hint)
    return out


def annotate_document(
    doc: Document,
    schema: Schema,
    registry: ExtractorRegistry,
    extractors: dict[str, CompiledExtractor] | None = None,
) -> AnnotationRecord:
    """Run every field's extractor on the document text.

    Values are normalized, type-validated (unparseable dates/numbers dropped
    with a warning), deduplicated in text order and capped at
    MAX_VALUES_PER_FIELD.
    """
    extractors = extractors or resolve_extractors(schema, registry)
    started = time.perf_counter()
    values: dict[str, list[str]] = {}
    warnings: list[str] = []
    for f in schema.fields:
        ext = extractors[f.name]
        if ext.config.kind == "external":
            raise ExtractorMissing(
                f"{f.name}: external fields require run_annotation with an endpoint"
            )
        norm = registry.normalization_for(ext)
        # A fast-tier field backs one relational cell: first match wins.
        limit = 1 if f.tier == "fast" else MAX_VALUES_PER_FIELD
        seen: set[str] = set()
        kept: list[str] = []
        for raw in ext.extract(doc.text):
            normalized = norm.apply(raw)
            if not normalized:
                continue
            validated = _validate_value(
                normalized, f.value_type, registry.day_first, warnings, f.name
            )
            if validated is None or validated in seen:
                continue
            seen.add(validated)
            kept.append(validated)
            if len(kept) >= limit:
                break
        if f.value_type == "categorical" and f.vocabulary:
            vocab = set(f.vocabulary)
            for v in kept:
                if v not in vocab:
                    warnings.append(f"{f.name}: value {v!r} outside closed vocabulary")
        values[f.name] = kept
    return AnnotationRecord(
        doc_id=doc.doc_id,
        values=values,
        annotator_id=registry.registry_id,
        elapsed_seconds=time.perf_counter() - started,
        warnings=warnings,
    )


def run_annotation(
    corpus: Corpus,
    schema: Schema,
    registry: ExtractorRegistry,
    parallelism: int = 1,
    external_client=None,
) -> AnnotationBatch:
    """Annotate the whole corpus; record order always equals corpus order.

    Fields whose extractor kind is ``external`` are dispatched through
    ``external_client`` (see .protocol); per-document external failures are
    collected on the batch rather than aborting it.
    """
    if len(corpus) == 0:
        raise ValueError("corpus is empty")
    extractors = resolve_extractors(schema, registry)  # fail fast
    local_fields = [f for f in schema.fields if extractors[f.name].config.kind != "external"]
    external_fields = [f for f in schema.fields if extractors[f.name].config.kind == "external"]
    if external_fields and external_client is None:
        raise ExtractorMissing(external_fields[0].name)

    local_schema = Schema(
        schema_id=schema.schema_id,
        granularity_label=schema.granularity_label,
        fields=tuple(local_fields) if local_fields else schema.fields,
        hierarchy=schema.hierarchy,
    ) if external_fields else schema

    docs = list(corpus)

    def work(doc: Document) -> AnnotationRecord:
        if not local_fields and external_fields:
            return AnnotationRecord(doc_id=doc.doc_id, values={}, annotator_id=registry.registry_id)
        return annotate_document(doc, local_schema, registry, extractors)

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            records = list(pool.map(work, docs))
    else:
        records = [work(doc) for doc in docs]

    failures: list[tuple[str, str]] = []
    if external_fields:
        external_values = external_client.annotate(docs, external_fields)
        for rec, doc in zip(records, docs):
            reply = external_values.get(doc.doc_id)
            if reply is None:
                failures.append((doc.doc_id, "no external response"))
                for f in external_fields:
                    rec.values[f.name] = []
                continue
            if isinstance(reply, Exception):
                failures.append((doc.doc_id, str(reply)))
                for f in external_fields:
                    rec.values[f.name] = []
                continue
            for f in external_fields:
                raw_values = reply.get(f.name, [])
                norm = extractors[f.name].config.normalization
                limit = 1 if f.tier == "fast" else MAX_VALUES_PER_FIELD
                warnings: list[str] = []
                seen: set[str] = set()
                kept = []
                for raw in raw_values:
                    normalized = norm.apply(str(raw))
                    if not normalized:
                        continue
                    validated = _validate_value(
                        normalized, f.value_type, registry.day_first, warnings, f.name
                    )
                    if validated is None or validated in seen:
                        continue
                    seen.add(validated)
                    kept.append(validated)
                    if len(kept) >= limit:
                        break
                rec.values[f.name] = kept
                rec.warnings.extend(warnings)

    # Canonical field order inside each record (schema order is sorted).
    ordered_names = [f.name for f in schema.fields]
    for rec in records:
        rec.values = {name: rec.values.get(name, []) for name in ordered_names}
    return AnnotationBatch(schema_id=schema.schema_id, records=records, failures=failures)
