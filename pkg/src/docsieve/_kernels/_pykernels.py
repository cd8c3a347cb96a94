"""Pure-Python kernels: the fallback implementation of the hot loops.

These functions are the semantic reference for ``_ckernels``. Both
implementations must produce bit-identical results: hashing is FNV-1a over
UTF-8 bytes (never Python's salted ``hash``), and the float accumulation
order is fixed (word features first, then character trigrams).
"""

from __future__ import annotations

import numpy as np

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def fold_features(
    token_bytes: list[bytes],
    text_bytes: bytes,
    offsets: list[int],
    dims: int,
) -> np.ndarray:
    """Signed feature hashing of word unigrams and character trigrams.

    ``offsets[i]`` is the byte offset of character ``i`` inside
    ``text_bytes`` (len(offsets) == n_chars + 1), so trigram ``i`` spans
    ``text_bytes[offsets[i]:offsets[i + 3]]``. Each feature's 64-bit hash
    selects a bucket (``h % dims``) and a sign (top bit).
    """
    vec = np.zeros(dims, dtype=np.float64)
    for tb in token_bytes:
        h = fnv1a64(b"w:" + tb)
        vec[h % dims] += 1.0 if (h >> 63) == 0 else -1.0
    n_chars = len(offsets) - 1
    for i in range(n_chars - 2):
        h = fnv1a64(text_bytes[offsets[i] : offsets[i + 3]])
        vec[h % dims] += 1.0 if (h >> 63) == 0 else -1.0
    return vec


def intersect_sorted(a: list[str], b: list[str]) -> list[str]:
    """Intersection of two sorted, deduplicated string lists."""
    out: list[str] = []
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        x, y = a[i], b[j]
        if x == y:
            out.append(x)
            i += 1
            j += 1
        elif x < y:
            i += 1
        else:
            j += 1
    return out


def within_window(pos_a: list[int], pos_b: list[int], window: int) -> bool:
    """True if some position pair from the two sorted lists is <= window apart."""
    i = j = 0
    while i < len(pos_a) and j < len(pos_b):
        d = pos_a[i] - pos_b[j]
        if d < 0:
            d = -d
        if d <= window:
            return True
        if pos_a[i] < pos_b[j]:
            i += 1
        else:
            j += 1
    return False
