#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Run after `python setup.py build_ext --inplace`:

    python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from docsieve._kernels import _pykernels  # noqa: E402

try:
    from docsieve._kernels import _ckernels
except ImportError:
    _ckernels = None

WORDS = (
    "court appeal merger filing judgment amount review tribunal order "
    "hearing counsel evidence ruling motion party defendant plaintiff"
).split()


def make_docs(n: int, tokens_per_doc: int, seed: int = 7):
    rng = random.Random(seed)
    docs = []
    for _ in range(n):
        toks = [rng.choice(WORDS) for _ in range(tokens_per_doc)]
        joined = " ".join(toks)
        enc = joined.encode("utf-8")
        docs.append(([t.encode("utf-8") for t in toks], enc, list(range(len(joined) + 1))))
    return docs


def bench_fold(mod, docs, dims=256):
    start = time.perf_counter()
    for tb, enc, offs in docs:
        mod.fold_features(tb, enc, offs, dims)
    return time.perf_counter() - start


def bench_intersect(mod, lists, rounds=200):
    start = time.perf_counter()
    for _ in range(rounds):
        acc = lists[0]
        for other in lists[1:]:
            acc = mod.intersect_sorted(acc, other)
    return time.perf_counter() - start


def main() -> int:
    docs = make_docs(300, 400)
    rng = random.Random(3)
    universe = [f"doc{i:05d}" for i in range(20000)]
    lists = [sorted(rng.sample(universe, 8000)) for _ in range(4)]

    rows = []
    t_py_fold = bench_fold(_pykernels, docs)
    t_py_int = bench_intersect(_pykernels, lists)
    rows.append(("python", t_py_fold, t_py_int))
    if _ckernels is not None:
        t_c_fold = bench_fold(_ckernels, docs)
        t_c_int = bench_intersect(_ckernels, lists)
        rows.append(("c", t_c_fold, t_c_int))
        sample = docs[0]
        same = (
            _pykernels.fold_features(*sample, 256) == _ckernels.fold_features(*sample, 256)
        ).all()
        print(f"bit-identical outputs: {same}")
    else:
        print("compiled kernels not built; run: python setup.py build_ext --inplace")

    print(f"{'backend':8s} {'fold_features':>14s} {'intersect':>12s}")
    for name, fold_t, int_t in rows:
        print(f"{name:8s} {fold_t:>12.3f}s {int_t:>10.3f}s")
    if len(rows) == 2:
        print(
            f"speedup: fold x{rows[0][1] / rows[1][1]:.1f}, "
            f"intersect x{rows[0][2] / rows[1][2]:.1f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
