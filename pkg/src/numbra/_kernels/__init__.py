"""Kernel backend selection.

The compiled Cython extension is preferred when importable; otherwise the
NumPy fallback is used. Set NUMBRA_PURE=1 to force the fallback. Both
backends implement the same three entry points with identical semantics:

- aggregate_range(digit_vectors, lo, hi, n_digits, method, weights)
- knn_scan(embs, query_indices, k, metric=0)
- levenshtein(a, b)
"""

from __future__ import annotations

import os

from ._pure import COSINE, EUCLIDEAN, MAX, MEAN, MEDIAN, MIN, SUM, WEIGHTED

_FORCE_PURE = os.environ.get("NUMBRA_PURE", "") not in ("", "0")

if _FORCE_PURE:
    from . import _pure as _impl

    BACKEND = "pure"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _pure as _impl

        BACKEND = "pure"

aggregate_range = _impl.aggregate_range
knn_scan = _impl.knn_scan
levenshtein = _impl.levenshtein


def backend() -> str:
    """Name of the active backend: "compiled" or "pure"."""
    return BACKEND


__all__ = [
    "BACKEND",
    "COSINE",
    "EUCLIDEAN",
    "MAX",
    "MEAN",
    "MEDIAN",
    "MIN",
    "SUM",
    "WEIGHTED",
    "aggregate_range",
    "backend",
    "knn_scan",
    "levenshtein",
]
