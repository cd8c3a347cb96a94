"""Hot-loop kernels with a compiled core and a pure-Python fallback.

The compiled extension (``_ckernels``, built from Cython) is preferred when
present; otherwise the pure Python twin is used. Set ``DOCSIEVE_PURE=1`` to
force the fallback. Both implementations are bit-identical; see
``benchmarks/bench_kernels.py`` for the speed comparison.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"

if not os.environ.get("DOCSIEVE_PURE"):
    try:
        from . import _ckernels  # type: ignore[attr-defined]

        BACKEND = "c"
    except ImportError:
        _ckernels = None  # type: ignore[assignment]
else:
    _ckernels = None  # type: ignore[assignment]

_impl = _ckernels if BACKEND == "c" else _pykernels

fnv1a64 = _impl.fnv1a64
fold_features = _impl.fold_features
intersect_sorted = _impl.intersect_sorted
within_window = _impl.within_window

__all__ = [
    "BACKEND",
    "fnv1a64",
    "fold_features",
    "intersect_sorted",
    "within_window",
]
