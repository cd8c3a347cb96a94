"""Built-in deterministic extractors.

Every extractor is a pure function of (config, text): no model calls, no
state. The date grammar is a fixed list of ten surface formats normalized
to ISO-8601; ambiguous numeric dates (03/04/2004) read day-first unless the
registry is toggled, falling back to the other order when the preferred one
is not a real calendar date.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from ..errors import ExtractorMissing
from ..hints import ExtractorConfig, Normalization
from ..tokenizer import token_positions, tokenize, tokenize_cased
from ..values import canonical_number, find_dates, find_numbers, parse_date_value

MAX_VALUES_PER_FIELD = 16


def keyed_pattern_for(label: str, loose: bool = False) -> str:
    """Regex matching ``Label: value`` / ``Label - value`` with one capture.

    The strict capture stops at sentence punctuation (a dot stays part of
    the value only when followed by a digit, so decimals survive); the
    loose variant runs to end of line (used as an ensemble perturbation).
    """
    capture = r"([^\n]+)" if loose else r"((?:[^\n.;]|\.(?=\d))+)"
    return rf"\b{re.escape(label)}(?:\s*:|\s+[-–—])\s*{capture}"


@dataclass(frozen=True)
class CompiledExtractor:
    """One field's extractor bound to a registry's toggles."""

    config: ExtractorConfig
    case_sensitive: bool = False
    loose_tail: bool = False
    day_first: bool = True

    def extract(self, text: str) -> list[str]:
        kind = self.config.kind
        if kind in ("keyed_pattern", "regex"):
            flags = 0 if self.case_sensitive else re.IGNORECASE
            pattern = re.compile(self.config.pattern or "", flags)
            values = []
            for m in pattern.finditer(text):
                captured = m.group(1) if pattern.groups else m.group(0)
                if self.loose_tail:
                    captured = captured.rstrip(".;")
                values.append(captured)
            return values
        if kind == "dictionary":
            tokens = tokenize(text) if not self.case_sensitive else tokenize_cased(text)
            split = tokenize if not self.case_sensitive else tokenize_cased
            hits = []
            for term in self.config.vocabulary or ():
                positions = token_positions(tokens, split(term))
                if positions:
                    hits.append((positions[0], term))
            hits.sort()
            return [term for _, term in hits]
        if kind == "date":
            return [iso for _, iso in find_dates(text, self.day_first)]
        if kind == "number":
            return [canon for _, canon in find_numbers(text)]
        raise ExtractorMissing(f"kind {kind!r} is not locally runnable")


REGISTRY_VARIANTS = ("base", "case_sensitive", "no_ws_collapse", "loose_tail")


@dataclass(frozen=True)
class ExtractorRegistry:
    """Resolves schema fields to extractors; variants perturb matching rules.

    Variants back the consistency ensemble: ``case_sensitive`` stops folding
    case during matching, ``no_ws_collapse`` keeps interior whitespace during
    normalization, ``loose_tail`` lets keyed captures run to end of line.
    """

    registry_id: str = "builtin"
    variant: str = "base"
    day_first: bool = True

    def __post_init__(self) -> None:
        if self.variant not in REGISTRY_VARIANTS:
            raise ValueError(f"unknown registry variant {self.variant!r}")

    def resolve(self, field_name: str, value_type: str,
                hint: ExtractorConfig | None) -> CompiledExtractor:
        config = hint
        if config is None:
            if value_type == "date":
                config = ExtractorConfig(kind="date")
            elif value_type == "number":
                config = ExtractorConfig(kind="number")
            else:
                raise ExtractorMissing(field_name)
        if self.variant == "no_ws_collapse":
            config = replace(
                config,
                normalization=replace(config.normalization, collapse_whitespace=False),
            )
        return CompiledExtractor(
            config=config,
            case_sensitive=self.variant == "case_sensitive",
            loose_tail=self.variant == "loose_tail",
            day_first=self.day_first,
        )

    def normalization_for(self, extractor: CompiledExtractor) -> Normalization:
        return extractor.config.normalization


def consistency_ensemble(day_first: bool = True) -> list[ExtractorRegistry]:
    """The default 3-member perturbed-annotator ensemble."""
    return [
        ExtractorRegistry(registry_id="builtin", variant="base", day_first=day_first),
        ExtractorRegistry(registry_id="builtin@case", variant="case_sensitive", day_first=day_first),
        ExtractorRegistry(registry_id="builtin@loose", variant="loose_tail", day_first=day_first),
    ]
