"""Extractor configuration attached to schema fields as extraction hints."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

EXTRACTOR_KINDS = ("keyed_pattern", "regex", "dictionary", "date", "number", "external")
_CAPTURING_KINDS = ("keyed_pattern", "regex")


@dataclass(frozen=True)
class Normalization:
    lowercase: bool = True
    trim: bool = True
    collapse_whitespace: bool = True

    def apply(self, value: str) -> str:
        if self.collapse_whitespace:
            value = " ".join(value.split())
        if self.trim:
            value = value.strip()
        if self.lowercase:
            value = value.lower()
        return value

    def to_json(self) -> dict:
        return {
            "lowercase": self.lowercase,
            "trim": self.trim,
            "collapse_whitespace": self.collapse_whitespace,
        }

    @staticmethod
    def from_json(obj: dict) -> "Normalization":
        return Normalization(
            lowercase=bool(obj.get("lowercase", True)),
            trim=bool(obj.get("trim", True)),
            collapse_whitespace=bool(obj.get("collapse_whitespace", True)),
        )


@dataclass(frozen=True)
class ExtractorConfig:
    kind: str
    pattern: str | None = None
    vocabulary: tuple[str, ...] | None = None
    normalization: Normalization = field(default_factory=Normalization)

    def __post_init__(self) -> None:
        if self.kind not in EXTRACTOR_KINDS:
            raise ValueError(f"unknown extractor kind {self.kind!r}")
        if self.kind in _CAPTURING_KINDS:
            if not self.pattern:
                raise ValueError(f"{self.kind} extractor requires a pattern")
            compiled = re.compile(self.pattern)
            if compiled.groups != 1:
                raise ValueError(
                    f"{self.kind} pattern must have exactly one capture group, "
                    f"got {compiled.groups}"
                )
        if self.kind == "dictionary" and not self.vocabulary:
            raise ValueError("dictionary extractor requires a vocabulary")

    def to_json(self) -> dict:
        obj: dict = {"kind": self.kind}
        if self.pattern is not None:
            obj["pattern"] = self.pattern
        if self.vocabulary is not None:
            obj["vocabulary"] = list(self.vocabulary)
        obj["normalization"] = self.normalization.to_json()
        return obj

    @staticmethod
    def from_json(obj: dict) -> "ExtractorConfig":
        vocab = obj.get("vocabulary")
        return ExtractorConfig(
            kind=obj["kind"],
            pattern=obj.get("pattern"),
            vocabulary=tuple(vocab) if vocab is not None else None,
            normalization=Normalization.from_json(obj.get("normalization", {})),
        )
