# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Accumulation order matches numbra._kernels._pure exactly, and the extension
is built with -ffp-contract=off, so aggregate_range agrees bitwise with the
fallback. knn_scan sums squared differences directly instead of expanding a
Gram matrix; the resulting neighbour sets agree except on sub-ulp ties
between non-identical vectors.
"""

import numpy as np

cimport cython
from libc.math cimport INFINITY, sqrt

WEIGHTED, SUM, MEAN, MAX, MIN, MEDIAN = range(6)
EUCLIDEAN, COSINE = 0, 1


def aggregate_range(double[:, ::1] digit_vectors, long lo, long hi,
                    int n_digits, int method, double[::1] weights):
    """Aggregated embeddings for every integer in [lo, hi].

    Same contract as the fallback: all members have exactly n_digits digits,
    row r corresponds to lo + r.
    """
    if n_digits < 1 or n_digits > 64:
        raise ValueError(f"n_digits out of range: {n_digits}")
    cdef Py_ssize_t n = hi - lo + 1
    cdef Py_ssize_t dim = digit_vectors.shape[1]
    out_arr = np.zeros((n, dim), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef long digs[64]
    cdef long sorted_digs[64]
    cdef double vals[64]
    cdef Py_ssize_t r, i, j, p
    cdef long rem, d, key
    cdef double w, v
    cdef Py_ssize_t mid = n_digits // 2

    with nogil:
        for r in range(n):
            rem = lo + r
            for i in range(n_digits - 1, -1, -1):
                digs[i] = rem % 10
                rem = rem // 10

            if method == 0:  # weighted, leftmost first
                for i in range(n_digits):
                    w = weights[i]
                    d = digs[i]
                    for j in range(dim):
                        out[r, j] += w * digit_vectors[d, j]
            elif method == 1 or method == 2:  # sum / mean, ascending digits
                for i in range(n_digits):
                    key = digs[i]
                    p = i
                    while p > 0 and sorted_digs[p - 1] > key:
                        sorted_digs[p] = sorted_digs[p - 1]
                        p -= 1
                    sorted_digs[p] = key
                for i in range(n_digits):
                    d = sorted_digs[i]
                    for j in range(dim):
                        out[r, j] += digit_vectors[d, j]
                if method == 2:
                    for j in range(dim):
                        out[r, j] /= n_digits
            elif method == 3 or method == 4:  # running max / min
                d = digs[0]
                for j in range(dim):
                    out[r, j] = digit_vectors[d, j]
                for i in range(1, n_digits):
                    d = digs[i]
                    if method == 3:
                        for j in range(dim):
                            if digit_vectors[d, j] > out[r, j]:
                                out[r, j] = digit_vectors[d, j]
                    else:
                        for j in range(dim):
                            if digit_vectors[d, j] < out[r, j]:
                                out[r, j] = digit_vectors[d, j]
            else:  # per-component median
                for j in range(dim):
                    for i in range(n_digits):
                        v = digit_vectors[digs[i], j]
                        p = i
                        while p > 0 and vals[p - 1] > v:
                            vals[p] = vals[p - 1]
                            p -= 1
                        vals[p] = v
                    if n_digits % 2:
                        out[r, j] = vals[mid]
                    else:
                        out[r, j] = (vals[mid - 1] + vals[mid]) / 2.0
    return out_arr


def knn_scan(double[:, ::1] embs, long[::1] query_indices, int k,
             int metric=0):
    """For each query row index, the k nearest other rows of embs.

    Ties break toward the smaller row index. Releases the GIL for the scan,
    so disjoint query chunks can run on a thread pool.
    """
    cdef Py_ssize_t n = embs.shape[0]
    cdef Py_ssize_t dim = embs.shape[1]
    cdef Py_ssize_t nq = query_indices.shape[0]
    if k < 1 or k > n - 1:
        raise ValueError(f"k out of range: {k}")
    out_arr = np.empty((nq, k), dtype=np.int64)
    cdef long[:, ::1] out = out_arr
    norms_arr = np.sqrt(np.einsum("ij,ij->i", np.asarray(embs), np.asarray(embs)))
    cdef double[::1] norms = norms_arr
    best_d_arr = np.empty(k, dtype=np.float64)
    best_i_arr = np.empty(k, dtype=np.int64)
    cdef double[::1] best_d = best_d_arr
    cdef long[::1] best_i = best_i_arr
    cdef Py_ssize_t t, u, j, m, p
    cdef long qi
    cdef double d, diff, dot, denom

    with nogil:
        for t in range(nq):
            qi = query_indices[t]
            m = 0
            for u in range(n):
                if u == qi:
                    continue
                if metric == 0:
                    d = 0.0
                    for j in range(dim):
                        diff = embs[u, j] - embs[qi, j]
                        d += diff * diff
                else:
                    dot = 0.0
                    for j in range(dim):
                        dot += embs[u, j] * embs[qi, j]
                    denom = norms[u] * norms[qi]
                    if denom > 0.0:
                        d = 1.0 - dot / denom
                    else:
                        d = 1.0
                if m == k and d >= best_d[k - 1]:
                    # row indices are visited in ascending order, so an
                    # equal-distance candidate never displaces a kept one
                    continue
                p = m if m < k else k - 1
                while p > 0 and best_d[p - 1] > d:
                    best_d[p] = best_d[p - 1]
                    best_i[p] = best_i[p - 1]
                    p -= 1
                best_d[p] = d
                best_i[p] = u
                if m < k:
                    m += 1
            for p in range(k):
                out[t, p] = best_i[p]
    return out_arr


def levenshtein(a: str, b: str) -> int:
    """Minimum insertions + deletions + substitutions turning a into b."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    cdef long[::1] ca = np.frombuffer(a.encode("utf-32-le"), dtype=np.uint32).astype(np.int64)
    cdef long[::1] cb = np.frombuffer(b.encode("utf-32-le"), dtype=np.uint32).astype(np.int64)
    cdef Py_ssize_t la = ca.shape[0]
    cdef Py_ssize_t lb = cb.shape[0]
    prev_arr = np.arange(lb + 1, dtype=np.int64)
    cur_arr = np.empty(lb + 1, dtype=np.int64)
    cdef long[::1] prev = prev_arr
    cdef long[::1] cur = cur_arr
    cdef long[::1] tmp
    cdef Py_ssize_t i, j
    cdef long cost, best

    with nogil:
        for i in range(1, la + 1):
            cur[0] = i
            for j in range(1, lb + 1):
                cost = 0 if ca[i - 1] == cb[j - 1] else 1
                best = prev[j] + 1
                if cur[j - 1] + 1 < best:
                    best = cur[j - 1] + 1
                if prev[j - 1] + cost < best:
                    best = prev[j - 1] + cost
                cur[j] = best
            tmp = prev
            prev = cur
            cur = tmp
    return int(prev[lb])
