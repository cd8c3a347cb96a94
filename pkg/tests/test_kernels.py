"""Compiled kernels must be bit-identical to the pure-Python fallback."""

from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docsieve._kernels import BACKEND, _pykernels

try:
    from docsieve._kernels import _ckernels
except ImportError:
    _ckernels = None

needs_compiled = pytest.mark.skipif(
    _ckernels is None, reason="compiled kernels not built"
)


def _prep(text: str):
    tokens = text.split()
    joined = " ".join(tokens)
    encoded = joined.encode("utf-8")
    if len(encoded) == len(joined):
        offsets = list(range(len(joined) + 1))
    else:
        offsets = [0]
        pos = 0
        for ch in joined:
            pos += len(ch.encode("utf-8"))
            offsets.append(pos)
    return [t.encode("utf-8") for t in tokens], encoded, offsets


def test_backend_reports_a_known_value():
    assert BACKEND in ("c", "python")


@needs_compiled
def test_fnv_matches_pure():
    rng = random.Random(0)
    for _ in range(200):
        data = bytes(rng.randrange(256) for _ in range(rng.randrange(0, 40)))
        assert _pykernels.fnv1a64(data) == _ckernels.fnv1a64(data)


@needs_compiled
@settings(max_examples=80, deadline=None)
@given(st.text(min_size=0, max_size=60), st.sampled_from([8, 64, 256]))
def test_fold_features_bit_identical(text, dims):
    tokens, encoded, offsets = _prep(text)
    a = _pykernels.fold_features(tokens, encoded, offsets, dims)
    b = _ckernels.fold_features(tokens, encoded, offsets, dims)
    assert a.dtype == b.dtype == np.float64
    assert (a == b).all()


@needs_compiled
@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(0, 400), max_size=40),
    st.lists(st.integers(0, 400), max_size=40),
)
def test_intersect_bit_identical(a_raw, b_raw):
    a = sorted({f"d{x:04d}" for x in a_raw})
    b = sorted({f"d{x:04d}" for x in b_raw})
    assert _pykernels.intersect_sorted(a, b) == _ckernels.intersect_sorted(a, b)


@needs_compiled
@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(0, 200), min_size=0, max_size=20),
    st.lists(st.integers(0, 200), min_size=0, max_size=20),
    st.integers(1, 20),
)
def test_within_window_identical(pa, pb, window):
    pa, pb = sorted(set(pa)), sorted(set(pb))
    assert _pykernels.within_window(pa, pb, window) == _ckernels.within_window(
        pa, pb, window
    )


def test_intersect_properties():
    rng = random.Random(4)
    universe = [f"d{i:03d}" for i in range(200)]
    for _ in range(30):
        a = sorted(rng.sample(universe, rng.randint(0, 60)))
        b = sorted(rng.sample(universe, rng.randint(0, 60)))
        got = _pykernels.intersect_sorted(a, b)
        assert got == sorted(set(a) & set(b))


def test_unicode_embedding_path():
    from docsieve.embedding import embed_text

    v = embed_text("naïve café décision — détail", 64)
    assert abs(float(np.linalg.norm(v.values)) - 1.0) < 1e-6
