"""NumPy implementations of the hot kernels.

Selected at import time when the compiled extension is unavailable (or when
NUMBRA_PURE is set). Must produce results interchangeable with
``numbra._kernels._core``: aggregations are accumulated in the same operation
order, so the two backends agree bitwise; kNN index sets agree except on
sub-ulp distance ties between non-identical vectors.
"""

from __future__ import annotations

import numpy as np

# Aggregation method codes shared with the compiled kernel.
WEIGHTED, SUM, MEAN, MAX, MIN, MEDIAN = range(6)

EUCLIDEAN, COSINE = 0, 1

_MEDIAN_CHUNK = 65536


def aggregate_range(
    digit_vectors: np.ndarray,
    lo: int,
    hi: int,
    n_digits: int,
    method: int,
    weights: np.ndarray,
) -> np.ndarray:
    """Aggregated embeddings for every integer in [lo, hi].

    All members must have exactly *n_digits* digits. Row r corresponds to
    lo + r. *digit_vectors* is the (10, dim) matrix of digit embeddings.
    """
    nums = np.arange(lo, hi + 1, dtype=np.int64)
    n = nums.size
    dim = digit_vectors.shape[1]
    digs = np.empty((n, n_digits), dtype=np.int64)
    rem = nums
    for pos in range(n_digits - 1, -1, -1):
        digs[:, pos] = rem % 10
        rem = rem // 10

    if method == WEIGHTED:
        out = np.zeros((n, dim))
        for i in range(n_digits):
            out += weights[i] * digit_vectors[digs[:, i]]
        return out
    if method in (SUM, MEAN):
        # ascending digit order makes permutation invariance bitwise
        digs = np.sort(digs, axis=1)
        out = np.zeros((n, dim))
        for i in range(n_digits):
            out += digit_vectors[digs[:, i]]
        if method == MEAN:
            out /= n_digits
        return out
    if method in (MAX, MIN):
        op = np.maximum if method == MAX else np.minimum
        out = digit_vectors[digs[:, 0]].copy()
        for i in range(1, n_digits):
            op(out, digit_vectors[digs[:, i]], out=out)
        return out
    if method == MEDIAN:
        out = np.empty((n, dim))
        mid = n_digits // 2
        for c0 in range(0, n, _MEDIAN_CHUNK):
            c1 = min(n, c0 + _MEDIAN_CHUNK)
            vals = np.sort(digit_vectors[digs[c0:c1]], axis=1)
            if n_digits % 2:
                out[c0:c1] = vals[:, mid]
            else:
                out[c0:c1] = (vals[:, mid - 1] + vals[:, mid]) / 2.0
        return out
    raise ValueError(f"unknown method code {method}")


def _topk_row(dist: np.ndarray, self_index: int, k: int) -> np.ndarray:
    """Indices of the k smallest entries, self excluded, ties toward the
    smaller index."""
    dist[self_index] = np.inf
    kth = np.partition(dist, k - 1)[k - 1]
    candidates = np.flatnonzero(dist <= kth)
    order = np.lexsort((candidates, dist[candidates]))
    return candidates[order[:k]]


def knn_scan(
    embs: np.ndarray,
    query_indices: np.ndarray,
    k: int,
    metric: int = EUCLIDEAN,
) -> np.ndarray:
    """For each query row index, the k nearest other rows of *embs*.

    Euclidean compares squared distance; cosine compares 1 - cosine
    similarity (zero-norm vectors treated as similarity 0). Ties break
    toward the smaller row index.
    """
    embs = np.ascontiguousarray(embs, dtype=np.float64)
    query_indices = np.asarray(query_indices, dtype=np.int64)
    n = embs.shape[0]
    out = np.empty((query_indices.size, k), dtype=np.int64)
    sq_norms = np.einsum("ij,ij->i", embs, embs)
    norms = np.sqrt(sq_norms)
    chunk = max(1, int(8_000_000 // max(n, 1)))
    for c0 in range(0, query_indices.size, chunk):
        qs = query_indices[c0 : c0 + chunk]
        gram = embs[qs] @ embs.T
        if metric == EUCLIDEAN:
            d = sq_norms[None, :] - 2.0 * gram + sq_norms[qs][:, None]
            np.maximum(d, 0.0, out=d)
        else:
            denom = norms[qs][:, None] * norms[None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                cos = np.where(denom > 0.0, gram / denom, 0.0)
            d = 1.0 - cos
        for r in range(qs.size):
            out[c0 + r] = _topk_row(d[r], int(qs[r]), k)
    return out


def levenshtein(a: str, b: str) -> int:
    """Minimum insertions + deletions + substitutions turning a into b."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i] + [0] * len(b)
        for j, cb in enumerate(b, 1):
            cost = 0 if ca == cb else 1
            current[j] = min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost)
        previous = current
    return previous[-1]
