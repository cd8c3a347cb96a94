"""Candidate schema construction from per-cluster mined field pools."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..embedding import EmbeddingCache
from ..errors import EmptyPool
from ..schema import FieldSpec, Schema, build_tier_hierarchy
from .mining import MinedField

LITE_MAX_FIELDS = 6
STD_MAX_FIELDS = 14
MERGE_COSINE_THRESHOLD = 0.9

# Most-general-wins ordering for type conflicts between merged pools.
_TYPE_GENERALITY = {"string_set": 4, "string": 3, "categorical": 2, "date": 1, "number": 1}


@dataclass
class CandidateSet:
    entries: list[tuple[Schema, object | None]] = field(default_factory=list)

    def __post_init__(self) -> None:
        ids = [s.schema_id for s, _ in self.entries]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate schema_ids in candidate set")

    def schemas(self) -> list[Schema]:
        return [s for s, _ in self.entries]

    def by_id(self, schema_id: str) -> Schema:
        for s, _ in self.entries:
            if s.schema_id == schema_id:
                return s
        raise KeyError(schema_id)


def _merge_specs(a: MinedField, b: MinedField) -> MinedField:
    """Fold b into a (a has the higher support); keep the more general type."""
    spec = a.spec
    if _TYPE_GENERALITY.get(b.spec.value_type, 0) > _TYPE_GENERALITY.get(spec.value_type, 0):
        spec = FieldSpec(
            name=spec.name,
            description=spec.description,
            value_type=b.spec.value_type,
            tier=b.spec.tier,
            extraction_hint=spec.extraction_hint,
            vocabulary=None,
        )
    return MinedField(
        spec=spec,
        support=a.support + b.support,
        multi_valued=a.multi_valued or b.multi_valued,
    )


def merge_pools(
    pools: list[list[MinedField]],
    embeddings: EmbeddingCache | None = None,
    threshold: float = MERGE_COSINE_THRESHOLD,
) -> list[MinedField]:
    """Union the per-cluster pools, fusing same-name or near-duplicate fields."""
    embeddings = embeddings or EmbeddingCache()
    merged: dict[str, MinedField] = {}
    for pool in pools:
        for cand in pool:
            name = cand.spec.name
            if name in merged:
                keep, other = merged[name], cand
                if other.support > keep.support:
                    keep, other = other, keep
                merged[name] = _merge_specs(keep, other)
                continue
            # Near-duplicate under a different name: embedding similarity of
            # "name description" strings.
            fused = False
            for existing_name, existing in merged.items():
                sim = embeddings.cosine(
                    f"{existing.spec.name} {existing.spec.description}",
                    f"{cand.spec.name} {cand.spec.description}",
                )
                if sim >= threshold:
                    keep, other = existing, cand
                    if other.support > keep.support:
                        keep, other = other, keep
                    merged.pop(existing_name)
                    merged[keep.spec.name] = _merge_specs(keep, other)
                    fused = True
                    break
            if not fused:
                merged[name] = cand
    ranked = sorted(merged.values(), key=lambda m: (-m.support, m.spec.name))
    return ranked


def _make_schema(schema_id: str, granularity: str, members: list[FieldSpec]) -> Schema:
    return Schema(
        schema_id=schema_id,
        granularity_label=granularity,
        fields=tuple(members),
        hierarchy=build_tier_hierarchy(members),
    )


def build_candidate_schemas(
    pools: list[list[MinedField]],
    embeddings: EmbeddingCache | None = None,
) -> CandidateSet:
    """Emit lite/std/full granularities over the merged field pool.

    lite takes the top-ranked fast+sem fields (at most LITE_MAX_FIELDS,
    forcing in the best fast field so the schema stays indexable), std
    extends lite with further fields up to STD_MAX_FIELDS, full keeps every
    surviving candidate. Field sets are nested by construction.
    """
    if not any(pools):
        raise EmptyPool("every pool is empty")
    ranked = merge_pools(pools, embeddings)

    fast_sem = [m.spec for m in ranked if m.spec.tier in ("fast", "sem")]
    lite_members = fast_sem[:LITE_MAX_FIELDS]
    if not any(f.tier == "fast" for f in lite_members):
        best_fast = next((m.spec for m in ranked if m.spec.tier == "fast"), None)
        if best_fast is not None:
            if len(lite_members) >= LITE_MAX_FIELDS:
                lite_members = lite_members[:-1]
            lite_members = lite_members + [best_fast]

    lite_names = {f.name for f in lite_members}
    std_members = list(lite_members)
    for m in ranked:
        if len(std_members) >= STD_MAX_FIELDS:
            break
        if m.spec.name not in lite_names:
            std_members.append(m.spec)
            lite_names.add(m.spec.name)

    full_members = [m.spec for m in ranked]

    entries: list[tuple[Schema, object | None]] = []
    for gran, members in (("lite", lite_members), ("std", std_members), ("full", full_members)):
        if not members:
            continue
        entries.append((_make_schema(gran, gran, members), None))
    if not entries:
        raise EmptyPool("no candidate fields survived merging")
    return CandidateSet(entries=entries)
