"""Field-candidate mining over a document cluster.

Three miners, all deterministic and model-free:

  (a) keyed surface patterns ``Label: value`` / ``Label - value`` whose label
      recurs in at least ``min_support`` of the cluster's documents;
  (b) typed pattern families (dates, numeric/currency amounts) present in at
      least ``min_support`` of documents;
  (c) high-document-frequency capitalized n-grams, promoted to semantic
      dictionary fields.

Value types are inferred from the observed values; fields observed to be
multi-valued never land in the fast tier (a relational cell holds one value).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..annotate.extractors import keyed_pattern_for
from ..values import canonical_number, find_dates, find_numbers, parse_date_value
from ..hints import ExtractorConfig
from ..corpus import Document
from ..schema import FieldSpec

DEFAULT_MIN_SUPPORT = 0.3
MAX_NGRAM_FIELDS = 8
MAX_POOL_FIELDS = 40
CATEGORICAL_MAX_DISTINCT = 8

_LABEL_RE = re.compile(
    r"\b([A-Z][A-Za-z0-9]*(?:[ ][A-Z][A-Za-z0-9]*){0,3})(?:\s*:|\s+[-–—])\s*((?:[^\n.;]|\.(?=\d))+)"
)
_CAP_TOKEN = r"[A-Z][a-z0-9']+"
_CAP_RUN_RE = re.compile(rf"\b({_CAP_TOKEN}(?:[ ]+{_CAP_TOKEN}){{0,3}})\b")

# Capitalized words that are calendar/leading noise, not entity evidence.
_NGRAM_STOPWORDS = {
    "january", "february", "march", "april", "may", "june", "july", "august",
    "september", "october", "november", "december", "monday", "tuesday",
    "wednesday", "thursday", "friday", "saturday", "sunday",
}
_LEADING_DETERMINERS = {"the", "a", "an"}


@dataclass
class MinedField:
    spec: FieldSpec
    support: float  # fraction of sampled docs containing the pattern
    multi_valued: bool = False


def snake_case(label: str) -> str:
    out = re.sub(r"[^a-z0-9]+", "_", label.lower()).strip("_")
    if not out:
        return ""
    if not out[0].isalpha():
        out = "f_" + out
    return out[:64]


def _sample(docs: list[Document], cap: int) -> list[Document]:
    if cap <= 0 or len(docs) <= cap:
        return list(docs)
    step = len(docs) / cap
    return [docs[int(i * step)] for i in range(cap)]


def _looks_like_date(value: str) -> bool:
    from ..tokenizer import tokenize

    return len(tokenize(value)) <= 4 and parse_date_value(value) is not None


def _looks_like_number(value: str) -> bool:
    return canonical_number(value) is not None


def _infer_value_type(values: list[str]) -> tuple[str, tuple[str, ...] | None]:
    """(value_type, categorical vocabulary or None) from observed values."""
    non_empty = [v for v in values if v.strip()]
    if not non_empty:
        return "string", None
    n = len(non_empty)
    if sum(_looks_like_date(v) for v in non_empty) >= 0.9 * n:
        return "date", None
    if sum(_looks_like_number(v) for v in non_empty) >= 0.9 * n:
        return "number", None
    normalized = sorted({" ".join(v.split()).lower() for v in non_empty})
    if len(normalized) <= CATEGORICAL_MAX_DISTINCT:
        return "categorical", tuple(normalized)
    return "string", None


def _mine_keyed(docs: list[Document], min_support: float) -> list[MinedField]:
    # label key (snake) -> surfaces seen, doc ids, values, per-doc counts
    surfaces: dict[str, dict[str, int]] = {}
    doc_hits: dict[str, set[str]] = {}
    values: dict[str, list[str]] = {}
    per_doc_counts: dict[str, dict[str, int]] = {}
    for doc in docs:
        for m in _LABEL_RE.finditer(doc.text):
            raw_label = " ".join(m.group(1).split())
            key = snake_case(raw_label)
            if not key:
                continue
            surfaces.setdefault(key, {})
            surfaces[key][raw_label] = surfaces[key].get(raw_label, 0) + 1
            doc_hits.setdefault(key, set()).add(doc.doc_id)
            values.setdefault(key, []).append(m.group(2).strip())
            counts = per_doc_counts.setdefault(key, {})
            counts[doc.doc_id] = counts.get(doc.doc_id, 0) + 1

    out = []
    n_docs = len(docs)
    for key in sorted(doc_hits):
        support = len(doc_hits[key]) / n_docs
        if support < min_support:
            continue
        # Canonical surface: most frequent, ties lexicographic.
        surface = sorted(surfaces[key].items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
        value_type, vocab = _infer_value_type(values[key])
        multi = any(c > 1 for c in per_doc_counts[key].values())
        tier = "fast" if value_type in ("categorical", "date", "number") and not multi else "sem"
        hint = ExtractorConfig(kind="keyed_pattern", pattern=keyed_pattern_for(surface))
        out.append(
            MinedField(
                spec=FieldSpec(
                    name=key,
                    description=f"value following the '{surface}' label",
                    value_type=value_type,
                    tier=tier,
                    extraction_hint=hint,
                    vocabulary=vocab,
                ),
                support=support,
                multi_valued=multi,
            )
        )
    return out


def _mine_typed_families(docs: list[Document], min_support: float) -> list[MinedField]:
    n_docs = len(docs)
    date_docs = sum(1 for d in docs if find_dates(d.text))
    number_docs = sum(1 for d in docs if find_numbers(d.text))
    out = []
    if date_docs / n_docs >= min_support:
        out.append(
            MinedField(
                spec=FieldSpec(
                    name="date_mention",
                    description="dates detected anywhere in the document text",
                    value_type="date",
                    tier="detail",
                    extraction_hint=ExtractorConfig(kind="date"),
                ),
                support=date_docs / n_docs,
                multi_valued=True,
            )
        )
    if number_docs / n_docs >= min_support:
        out.append(
            MinedField(
                spec=FieldSpec(
                    name="amount_mention",
                    description="numeric or currency amounts detected in the document text",
                    value_type="number",
                    tier="detail",
                    extraction_hint=ExtractorConfig(kind="number"),
                ),
                support=number_docs / n_docs,
                multi_valued=True,
            )
        )
    return out


def _mine_capitalized_ngrams(
    docs: list[Document], min_support: float, exclude: set[str]
) -> list[MinedField]:
    n_docs = len(docs)
    doc_freq: dict[str, set[str]] = {}
    surface_of: dict[str, str] = {}
    for doc in docs:
        for m in _CAP_RUN_RE.finditer(doc.text):
            phrase = " ".join(m.group(1).split())
            words = phrase.split()
            while words and words[0].lower() in _LEADING_DETERMINERS:
                words = words[1:]
            words = [w for w in words if w.lower() not in _NGRAM_STOPWORDS]
            if not words:
                continue
            phrase = " ".join(words)
            # Single capitalized words at a line/sentence start are usually
            # just sentence case, not entities.
            if len(words) == 1:
                before = doc.text[: m.start()].rstrip(" \t")
                if not before or before[-1] in ".!?:\n":
                    continue
            key = phrase.lower()
            doc_freq.setdefault(key, set()).add(doc.doc_id)
            surface_of.setdefault(key, phrase)

    ranked = sorted(
        (
            (len(ids) / n_docs, key)
            for key, ids in doc_freq.items()
            if len(ids) / n_docs >= min_support
        ),
        key=lambda t: (-t[0], t[1]),
    )
    out = []
    for support, key in ranked:
        name = snake_case(key)
        if not name or name in exclude:
            continue
        surface = surface_of[key]
        out.append(
            MinedField(
                spec=FieldSpec(
                    name=name,
                    description=f"mentions of the phrase '{surface}'",
                    value_type="string",
                    tier="sem",
                    extraction_hint=ExtractorConfig(
                        kind="dictionary", vocabulary=(surface,)
                    ),
                ),
                support=support,
            )
        )
        if len(out) >= MAX_NGRAM_FIELDS:
            break
    return out


def mine_cluster(
    docs: list[Document],
    sample_cap: int = 50,
    min_support: float = DEFAULT_MIN_SUPPORT,
) -> list[MinedField]:
    """All mined candidates for one cluster, ranked by support."""
    if not docs:
        raise ValueError("cluster is empty")
    sample = _sample(docs, sample_cap)
    keyed = _mine_keyed(sample, min_support)
    taken = {m.spec.name for m in keyed}
    typed = [m for m in _mine_typed_families(sample, min_support) if m.spec.name not in taken]
    taken.update(m.spec.name for m in typed)
    ngrams = _mine_capitalized_ngrams(sample, min_support, exclude=taken)
    merged = keyed + typed + ngrams
    merged.sort(key=lambda m: (-m.support, m.spec.name))
    return merged[:MAX_POOL_FIELDS]


def mine_field_candidates(
    cluster_docs: list[Document],
    sample_cap: int = 50,
    min_support: float = DEFAULT_MIN_SUPPORT,
) -> list[FieldSpec]:
    """Candidate field specs for one cluster (support-ranked)."""
    return [m.spec for m in mine_cluster(cluster_docs, sample_cap, min_support)]
