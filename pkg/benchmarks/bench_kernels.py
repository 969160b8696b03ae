"""Compare the compiled kernels against the NumPy fallback.

Runs the three hot entry points on representative workloads and prints a
timing table. Sanity-checks that both backends agree before timing anything,
so a benchmark run doubles as a quick parity smoke test.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from numbra._kernels import _pure
from numbra.aggregation import weights_array
from numbra.embeddings import synth_table

try:
    from numbra._kernels import _core
except ImportError:
    _core = None


def timeit(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_aggregate(backend, matrix, lo, hi, n_digits):
    w = weights_array(n_digits)

    def run():
        for method in range(6):
            backend.aggregate_range(matrix, lo, hi, n_digits, method, w)

    return run


def bench_knn(backend, embs, queries, k):
    return lambda: backend.knn_scan(embs, queries, k, _pure.EUCLIDEAN)


def bench_levenshtein(backend, pairs):
    def run():
        for a, b in pairs:
            backend.levenshtein(a, b)

    return run


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    table = synth_table(dim=8, seed=0)
    matrix = table.digit_matrix()
    rng = np.random.default_rng(0)

    embs = _pure.aggregate_range(matrix, 10000, 99999, 5, _pure.WEIGHTED, weights_array(5))
    queries = np.sort(rng.choice(embs.shape[0], size=500, replace=False)).astype(np.int64)
    alphabet = list("0123456789abcdef")
    pairs = [
        (
            "".join(rng.choice(alphabet, size=rng.integers(5, 40))),
            "".join(rng.choice(alphabet, size=rng.integers(5, 40))),
        )
        for _ in range(2000)
    ]

    workloads = [
        ("aggregate_range 5-digit x6 methods", lambda b: bench_aggregate(b, matrix, 10000, 99999, 5)),
        ("knn_scan 500q over 90k rows k=10", lambda b: bench_knn(b, embs, queries, 10)),
        ("levenshtein 2000 pairs", lambda b: bench_levenshtein(b, pairs)),
    ]

    if _core is None:
        print("compiled backend unavailable; timing the fallback only")

    # parity before speed
    for n_digits, lo, hi in ((2, 10, 99), (3, 100, 999)):
        w = weights_array(n_digits)
        for method in range(6):
            a = _pure.aggregate_range(matrix, lo, hi, n_digits, method, w)
            if _core is not None:
                b = _core.aggregate_range(matrix, lo, hi, n_digits, method, w)
                assert np.array_equal(a, b), f"parity failure: method {method}"

    header = f"{'workload':<40} {'pure':>10} {'compiled':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, make in workloads:
        pure_t = timeit(make(_pure), args.repeats)
        if _core is None:
            print(f"{name:<40} {pure_t * 1e3:>8.1f}ms {'n/a':>10} {'n/a':>8}")
            continue
        core_t = timeit(make(_core), args.repeats)
        print(
            f"{name:<40} {pure_t * 1e3:>8.1f}ms {core_t * 1e3:>8.1f}ms "
            f"{pure_t / core_t:>7.1f}x"
        )


if __name__ == "__main__":
    main()
