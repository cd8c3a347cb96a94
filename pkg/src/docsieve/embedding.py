"""Deterministic text embeddings via signed feature hashing.

Features are word unigrams plus character trigrams of the normalized token
stream, folded into a fixed number of buckets with a sign derived from the
feature hash, then L2-normalized. No model, no randomness: identical text
always yields a bit-identical vector, which keeps similarity-based tests
exact and clustering reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .tokenizer import tokenize

DEFAULT_DIMS = 256
MIN_DIMS = 8


@dataclass(frozen=True)
class EmbeddingVector:
    dims: int
    values: np.ndarray
    empty: bool = False

    def __post_init__(self) -> None:
        if self.values.shape != (self.dims,):
            raise ValueError(f"expected shape ({self.dims},), got {self.values.shape}")

    def cosine(self, other: "EmbeddingVector") -> float:
        """Cosine similarity; zero vectors yield 0."""
        if self.empty or other.empty:
            return 0.0
        return float(np.dot(self.values, other.values))


def _char_offsets(text: str, encoded: bytes) -> list[int]:
    """Byte offset of each character inside ``encoded`` (UTF-8)."""
    if len(encoded) == len(text):  # pure ASCII fast path
        return list(range(len(text) + 1))
    offs = [0]
    pos = 0
    for ch in text:
        pos += len(ch.encode("utf-8"))
        offs.append(pos)
    return offs


def embed_text(text: str, dims: int = DEFAULT_DIMS) -> EmbeddingVector:
    """Embed ``text`` into an L2-normalized vector of ``dims`` buckets.

    Empty text (no tokens) maps to the all-zero vector with ``empty=True``.
    """
    if dims < MIN_DIMS:
        raise ValueError(f"dims must be >= {MIN_DIMS}, got {dims}")
    tokens = tokenize(text)
    if not tokens:
        return EmbeddingVector(dims=dims, values=np.zeros(dims), empty=True)
    joined = " ".join(tokens)
    encoded = joined.encode("utf-8")
    offsets = _char_offsets(joined, encoded)
    token_bytes = [t.encode("utf-8") for t in tokens]
    vec = _kernels.fold_features(token_bytes, encoded, offsets, dims)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        # Possible only if every bucket cancels exactly; treat as empty.
        return EmbeddingVector(dims=dims, values=vec, empty=True)
    return EmbeddingVector(dims=dims, values=vec / norm)


@dataclass
class EmbeddingCache:
    """Memoizes embed_text; embeddings are pure so sharing is safe."""

    dims: int = DEFAULT_DIMS
    _cache: dict[str, EmbeddingVector] = field(default_factory=dict)

    def get(self, text: str) -> EmbeddingVector:
        hit = self._cache.get(text)
        if hit is None:
            hit = embed_text(text, self.dims)
            self._cache[text] = hit
        return hit

    def cosine(self, a: str, b: str) -> float:
        return self.get(a).cosine(self.get(b))
