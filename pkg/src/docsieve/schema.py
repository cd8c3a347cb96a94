"""Annotation schema model: field specs, tier hierarchy, validation.

A schema is a set of named field specs plus a tree of named groups whose
top level is the three tiers (fast / sem / detail). Depth counts group
levels only (a root-only tree holding fields directly has depth 1); the
branching factor of a group counts subgroups plus directly attached fields.
Both are always recomputed from the tree, never read from serialized input.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field, replace

from .hints import ExtractorConfig
from .errors import SchemaParseError

VALUE_TYPES = ("string", "number", "date", "categorical", "string_set")
TIERS = ("fast", "sem", "detail")
FAST_ALLOWED_TYPES = ("categorical", "date", "number")
GRANULARITIES = ("lite", "std", "full", "evolved")

_NAME_RE = re.compile(r"^[a-z][a-z0-9_]{0,63}$")


@dataclass(frozen=True)
class FieldSpec:
    name: str
    description: str
    value_type: str
    tier: str
    extraction_hint: ExtractorConfig | None = None
    vocabulary: tuple[str, ...] | None = None  # closed vocab for categorical

    def __post_init__(self) -> None:
        if self.value_type not in VALUE_TYPES:
            raise ValueError(f"unknown value_type {self.value_type!r}")
        if self.tier not in TIERS:
            raise ValueError(f"unknown tier {self.tier!r}")

    def with_tier(self, tier: str) -> "FieldSpec":
        return replace(self, tier=tier)


@dataclass(frozen=True)
class Group:
    name: str
    groups: tuple["Group", ...] = ()
    fields: tuple[str, ...] = ()

    def child_count(self) -> int:
        return len(self.groups) + len(self.fields)


@dataclass(frozen=True)
class Hierarchy:
    root: Group

    def depth(self) -> int:
        """Number of group levels on the deepest root-to-leaf-group path."""

        def walk(g: Group) -> int:
            if not g.groups:
                return 1
            return 1 + max(walk(child) for child in g.groups)

        return walk(self.root)

    def branching_factor(self) -> int:
        best = 0

        def walk(g: Group) -> None:
            nonlocal best
            best = max(best, g.child_count())
            for child in g.groups:
                walk(child)

        walk(self.root)
        return best

    def leaf_fields(self) -> list[str]:
        """All field names in the tree, in tree order (duplicates kept)."""
        out: list[str] = []

        def walk(g: Group) -> None:
            out.extend(g.fields)
            for child in g.groups:
                walk(child)

        walk(self.root)
        return out

    def tier_of(self, field_name: str) -> str | None:
        """Top-level group name under which the field sits (None at root)."""
        for top in self.root.groups:

            def contains(g: Group) -> bool:
                if field_name in g.fields:
                    return True
                return any(contains(child) for child in g.groups)

            if contains(top):
                return top.name
        return None


@dataclass(frozen=True)
class Schema:
    schema_id: str
    granularity_label: str
    fields: tuple[FieldSpec, ...]
    hierarchy: Hierarchy

    def __post_init__(self) -> None:
        if self.granularity_label not in GRANULARITIES:
            raise ValueError(f"unknown granularity {self.granularity_label!r}")
        # Canonical field order: sorted by name. Keeps serialization stable
        # and makes parse(serialize(s)) == s hold structurally.
        object.__setattr__(
            self, "fields", tuple(sorted(self.fields, key=lambda f: f.name))
        )

    def field_map(self) -> dict[str, FieldSpec]:
        return {f.name: f for f in self.fields}

    def tier_fields(self, tier: str) -> list[FieldSpec]:
        return [f for f in self.fields if f.tier == tier]

    def field_names(self) -> list[str]:
        return [f.name for f in self.fields]


@dataclass(frozen=True)
class FeasibilityLimits:
    max_depth: int = 4
    max_branching: int = 8
    t_max_seconds: float = 120.0
    storage_ratio_rho: float = 0.3

    def __post_init__(self) -> None:
        if self.max_depth <= 0 or self.max_branching <= 0:
            raise ValueError("depth/branching limits must be positive")
        if self.t_max_seconds <= 0:
            raise ValueError("t_max_seconds must be positive")
        if not (0 < self.storage_ratio_rho <= 1):
            raise ValueError("storage_ratio_rho must be in (0, 1]")


@dataclass
class ValidationReport:
    violations: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {code for code, _ in self.violations}

    def add(self, code: str, detail: str) -> None:
        self.violations.append((code, detail))


def validate_schema(schema: Schema) -> ValidationReport:
    """Report every violated structural invariant (empty report == valid)."""
    report = ValidationReport()
    if not schema.fields:
        report.add("no_fields", "schema declares no fields")
        return report

    seen: set[str] = set()
    for f in schema.fields:
        if f.name in seen:
            report.add("duplicate_field_name", f.name)
        seen.add(f.name)
        if not _NAME_RE.match(f.name):
            report.add("invalid_field_name", f.name)
        if f.tier == "fast" and f.value_type not in FAST_ALLOWED_TYPES:
            report.add(
                "fast_tier_type",
                f"{f.name}: fast tier requires {FAST_ALLOWED_TYPES}, got {f.value_type}",
            )

    if not any(f.tier == "fast" for f in schema.fields):
        report.add("no_fast_tier", "schema has no fast-tier field")

    declared = {f.name for f in schema.fields}
    leaves = schema.hierarchy.leaf_fields()
    leaf_counts: dict[str, int] = {}
    for name in leaves:
        leaf_counts[name] = leaf_counts.get(name, 0) + 1
    for name, count in sorted(leaf_counts.items()):
        if count > 1:
            report.add("field_in_multiple_groups", name)
        if name not in declared:
            report.add("unknown_field_in_hierarchy", name)
    for name in sorted(declared - set(leaf_counts)):
        report.add("field_not_in_hierarchy", name)

    for top in schema.hierarchy.root.groups:
        if top.name not in TIERS:
            report.add("top_group_not_tier", top.name)
    fmap = schema.field_map()
    for name in sorted(declared & set(leaf_counts)):
        placed = schema.hierarchy.tier_of(name)
        if placed is not None and placed in TIERS and placed != fmap[name].tier:
            report.add("tier_group_mismatch", f"{name}: tier={fmap[name].tier}, group={placed}")
    return report


def structural_feasible(
    schema: Schema, limits: FeasibilityLimits
) -> tuple[bool, list[str]]:
    """Depth/branching feasibility (time and storage are measured elsewhere)."""
    reasons = []
    if schema.hierarchy.depth() > limits.max_depth:
        reasons.append("depth_exceeded")
    if schema.hierarchy.branching_factor() > limits.max_branching:
        reasons.append("branching_exceeded")
    return (not reasons, reasons)


def build_tier_hierarchy(
    fields: list[FieldSpec],
    group_keys: dict[str, int] | None = None,
    chunk: int = 8,
) -> Hierarchy:
    """Arrange fields under their tier groups, nesting when a tier overflows.

    A tier holding more than ``chunk`` fields is split into subgroups of at
    most ``chunk`` fields each, so the branching limit of 8 holds for any
    pool of up to chunk*chunk fields per tier. ``group_keys`` biases which
    fields land in the same subgroup (used by the genome decoder); ordering
    inside a tier is (group_key, name) so decoding is deterministic.
    """
    group_keys = group_keys or {}
    tops = []
    for tier in TIERS:
        members = sorted(
            (f for f in fields if f.tier == tier),
            key=lambda f: (group_keys.get(f.name, 0), f.name),
        )
        if not members:
            continue
        names = tuple(f.name for f in members)
        if len(names) <= chunk:
            tops.append(Group(name=tier, fields=names))
        else:
            subs = tuple(
                Group(name=f"{tier}_{i // chunk + 1}", fields=names[i : i + chunk])
                for i in range(0, len(names), chunk)
            )
            tops.append(Group(name=tier, groups=subs))
    return Hierarchy(root=Group(name="root", groups=tuple(tops)))


# --- serialization ----------------------------------------------------------

def _field_to_json(f: FieldSpec) -> dict:
    return {
        "name": f.name,
        "description": f.description,
        "type": f.value_type,
        "tier": f.tier,
        "hint": f.extraction_hint.to_json() if f.extraction_hint else None,
        "vocabulary": list(f.vocabulary) if f.vocabulary is not None else None,
    }


def _group_to_json(g: Group) -> dict:
    return {
        "name": g.name,
        "groups": [_group_to_json(c) for c in g.groups],
        "fields": list(g.fields),
    }


def schema_to_json(schema: Schema) -> dict:
    return {
        "schema_id": schema.schema_id,
        "granularity": schema.granularity_label,
        "fields": [_field_to_json(f) for f in schema.fields],
        "hierarchy": _group_to_json(schema.hierarchy.root),
    }


def schema_serialize(schema: Schema) -> str:
    """Canonical JSON: fields sorted by name, keys sorted, stable layout."""
    return json.dumps(schema_to_json(schema), sort_keys=True, indent=2) + "\n"


def schema_hash(schema: Schema) -> str:
    return hashlib.sha256(schema_serialize(schema).encode("utf-8")).hexdigest()


def _require(obj: dict, key: str, pointer: str):
    if key not in obj:
        raise SchemaParseError(f"{pointer}/{key}", "missing key")
    return obj[key]


def _parse_group(obj, pointer: str) -> Group:
    if not isinstance(obj, dict):
        raise SchemaParseError(pointer, "group must be an object")
    name = _require(obj, "name", pointer)
    if not isinstance(name, str):
        raise SchemaParseError(f"{pointer}/name", "must be a string")
    raw_groups = obj.get("groups", [])
    raw_fields = obj.get("fields", [])
    if not isinstance(raw_groups, list):
        raise SchemaParseError(f"{pointer}/groups", "must be a list")
    if not isinstance(raw_fields, list) or any(not isinstance(x, str) for x in raw_fields):
        raise SchemaParseError(f"{pointer}/fields", "must be a list of strings")
    groups = tuple(
        _parse_group(g, f"{pointer}/groups/{i}") for i, g in enumerate(raw_groups)
    )
    return Group(name=name, groups=groups, fields=tuple(raw_fields))


def _parse_field(obj, pointer: str) -> FieldSpec:
    if not isinstance(obj, dict):
        raise SchemaParseError(pointer, "field must be an object")
    name = _require(obj, "name", pointer)
    description = _require(obj, "description", pointer)
    value_type = _require(obj, "type", pointer)
    tier = _require(obj, "tier", pointer)
    if value_type not in VALUE_TYPES:
        raise SchemaParseError(f"{pointer}/type", f"unknown value type {value_type!r}")
    if tier not in TIERS:
        raise SchemaParseError(f"{pointer}/tier", f"unknown tier {tier!r}")
    hint_obj = obj.get("hint")
    hint = None
    if hint_obj is not None:
        try:
            hint = ExtractorConfig.from_json(hint_obj)
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaParseError(f"{pointer}/hint", str(exc)) from exc
    vocab = obj.get("vocabulary")
    return FieldSpec(
        name=name,
        description=description,
        value_type=value_type,
        tier=tier,
        extraction_hint=hint,
        vocabulary=tuple(vocab) if vocab is not None else None,
    )


def schema_parse(text: str) -> Schema:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaParseError("", f"invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise SchemaParseError("", "schema document must be an object")
    schema_id = _require(obj, "schema_id", "")
    granularity = _require(obj, "granularity", "")
    if granularity not in GRANULARITIES:
        raise SchemaParseError("/granularity", f"unknown granularity {granularity!r}")
    raw_fields = _require(obj, "fields", "")
    if not isinstance(raw_fields, list):
        raise SchemaParseError("/fields", "must be a list")
    fields = tuple(
        _parse_field(f, f"/fields/{i}") for i, f in enumerate(raw_fields)
    )
    hierarchy = Hierarchy(root=_parse_group(_require(obj, "hierarchy", ""), "/hierarchy"))
    return Schema(
        schema_id=schema_id,
        granularity_label=granularity,
        fields=fields,
        hierarchy=hierarchy,
    )
