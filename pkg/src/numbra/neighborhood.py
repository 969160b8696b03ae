"""Neighbourhood alignment: natural vs embedding-space k nearest numbers.

For an integer n inside a digit-length bucket, the natural neighbourhood is
the k numerically closest other members; the embedded neighbourhood is the k
members whose aggregated embeddings sit closest in Euclidean distance. The
F1 score of the two sets (equal to their overlap fraction, since both have
size k) measures how faithfully an aggregation method preserves numeric
proximity. Sweeping buckets by digit length produces the per-method decay
curves.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .aggregation import MAX_DIGITS, Aggregator, weights_array
from .embeddings import EmbeddingTable
from .errors import DomainError

DEFAULT_K = 10
DEFAULT_SAMPLE_CAP = 2000

_METHOD_CODES = {
    Aggregator.WEIGHTED: _kernels.WEIGHTED,
    Aggregator.SUM: _kernels.SUM,
    Aggregator.MEAN: _kernels.MEAN,
    Aggregator.MAX: _kernels.MAX,
    Aggregator.MIN: _kernels.MIN,
    Aggregator.MEDIAN: _kernels.MEDIAN,
}

_METRIC_CODES = {"euclidean": _kernels.EUCLIDEAN, "cosine": _kernels.COSINE}


@dataclass(frozen=True)
class NeighborhoodReport:
    """Alignment of one number's natural and embedded neighbourhoods."""

    number: int
    k: int
    method: Aggregator
    natural: frozenset[int]
    embedded: frozenset[int]
    f1: float


@dataclass(frozen=True)
class BucketSummary:
    """Mean alignment over one digit-length bucket for one method."""

    digit_length: int
    method: Aggregator
    mean_f1: float
    count: int


def default_threads() -> int:
    """Worker count: NUMBRA_THREADS if set, else the machine's cores."""
    raw = os.environ.get("NUMBRA_THREADS", "")
    if raw:
        try:
            value = int(raw)
        except ValueError as exc:
            raise DomainError(f"NUMBRA_THREADS must be an integer, got {raw!r}") from exc
        if value < 1:
            raise DomainError(f"NUMBRA_THREADS must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1


def bucket_universe(digit_length: int) -> range:
    """All non-negative integers with the given digit count: 0..9 for one
    digit, 10^(D-1)..10^D - 1 above (no leading zeros)."""
    if not 1 <= digit_length <= 9:
        raise DomainError(f"digit_length must be in 1..9, got {digit_length}")
    if digit_length == 1:
        return range(0, 10)
    return range(10 ** (digit_length - 1), 10**digit_length)


def _check_universe(n: int, k: int, universe: range) -> None:
    if universe.step != 1:
        raise DomainError("universe must be a contiguous ascending range")
    if universe.start < 0:
        raise DomainError("universe members must be non-negative")
    if len(universe) == 0:
        raise DomainError("universe is empty")
    if len(str(universe[-1])) > MAX_DIGITS:
        raise DomainError("universe members exceed the digit cap")
    if n not in universe:
        raise DomainError(f"{n} is not in the universe")
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    if len(universe) <= k:
        raise DomainError(
            f"universe of size {len(universe)} cannot supply {k} neighbours"
        )


def natural_knn(n: int, k: int, universe: range) -> set[int]:
    """The k members of universe closest to n by absolute difference,
    excluding n; at equal distance the smaller value wins."""
    _check_universe(n, k, universe)
    lo, hi = universe[0], universe[-1]
    found: set[int] = set()
    d = 1
    while len(found) < k:
        if n - d >= lo:
            found.add(n - d)
            if len(found) == k:
                break
        if n + d <= hi:
            found.add(n + d)
        d += 1
    return found


def _length_blocks(lo: int, hi: int) -> list[tuple[int, int, int]]:
    """Split [lo, hi] into maximal runs of constant digit count."""
    blocks = []
    a = lo
    while a <= hi:
        d = len(str(a))
        b = min(hi, 10**d - 1)
        blocks.append((a, b, d))
        a = b + 1
    return blocks


def universe_embeddings(
    universe: range, table: EmbeddingTable, method: Aggregator
) -> np.ndarray:
    """Aggregated embedding of every universe member, one row per number in
    ascending order."""
    digit_matrix = table.digit_matrix()
    parts = []
    for a, b, n_digits in _length_blocks(universe[0], universe[-1]):
        parts.append(
            _kernels.aggregate_range(
                digit_matrix,
                a,
                b,
                n_digits,
                _METHOD_CODES[method],
                weights_array(n_digits),
            )
        )
    return parts[0] if len(parts) == 1 else np.concatenate(parts, axis=0)


def _scan(
    embs: np.ndarray, query_indices: np.ndarray, k: int, metric: int, threads: int
) -> np.ndarray:
    if threads <= 1 or query_indices.size < 2 * threads:
        return _kernels.knn_scan(embs, query_indices, k, metric)
    chunks = np.array_split(query_indices, threads)
    chunks = [c for c in chunks if c.size]
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        results = list(
            pool.map(lambda c: _kernels.knn_scan(embs, c, k, metric), chunks)
        )
    return np.concatenate(results, axis=0)


def embedded_knn(
    n: int,
    k: int,
    universe: range,
    table: EmbeddingTable,
    method: Aggregator,
    metric: str = "euclidean",
) -> set[int]:
    """The k members of universe whose aggregated embeddings are nearest to
    n's, excluding n; distance ties go to the smaller number. Exhaustive
    scan over the whole universe."""
    _check_universe(n, k, universe)
    if metric not in _METRIC_CODES:
        raise DomainError(f"unknown metric {metric!r}")
    embs = universe_embeddings(universe, table, method)
    query = np.array([n - universe[0]], dtype=np.int64)
    rows = _kernels.knn_scan(embs, query, k, _METRIC_CODES[metric])
    return {int(i) + universe[0] for i in rows[0]}


def f1_alignment(natural: set[int], embedded: set[int], k: int) -> float:
    """F1 between two k-sized sets; precision equals recall equals overlap
    fraction, so the harmonic mean collapses to |intersection| / k."""
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    if len(natural) != k or len(embedded) != k:
        raise DomainError(
            f"both sets must have size {k}, got {len(natural)} and {len(embedded)}"
        )
    return len(natural & embedded) / k


def report_for(
    n: int,
    k: int,
    universe: range,
    table: EmbeddingTable,
    method: Aggregator,
    metric: str = "euclidean",
) -> NeighborhoodReport:
    """Full alignment report for a single number."""
    natural = natural_knn(n, k, universe)
    embedded = embedded_knn(n, k, universe, table, method, metric)
    return NeighborhoodReport(
        number=n,
        k=k,
        method=method,
        natural=frozenset(natural),
        embedded=frozenset(embedded),
        f1=f1_alignment(natural, embedded, k),
    )


def prefix_sibling_count(report: NeighborhoodReport) -> int:
    """How many embedded neighbours share all but the last digit with the
    query (e.g. 452X members around 4523)."""
    prefix = report.number // 10
    return sum(1 for m in report.embedded if m // 10 == prefix)


def bucket_sweep(
    table: EmbeddingTable,
    methods: list[Aggregator],
    digit_lengths: list[int],
    k: int = DEFAULT_K,
    sample_cap: int | None = DEFAULT_SAMPLE_CAP,
    seed: int = 0,
    metric: str = "euclidean",
    threads: int | None = None,
) -> list[BucketSummary]:
    """Mean F1 per (digit length, method).

    Buckets larger than sample_cap are reduced to a seeded uniform sample
    (without replacement); smaller buckets are enumerated in full. Results
    are deterministic for a given seed regardless of thread count.
    """
    if not methods:
        raise DomainError("at least one method required")
    if not digit_lengths:
        raise DomainError("at least one digit length required")
    if sample_cap is not None and sample_cap < 1:
        raise DomainError(f"sample_cap must be positive, got {sample_cap}")
    if metric not in _METRIC_CODES:
        raise DomainError(f"unknown metric {metric!r}")
    n_threads = default_threads() if threads is None else threads
    if n_threads < 1:
        raise DomainError(f"threads must be >= 1, got {n_threads}")

    summaries = []
    for length in digit_lengths:
        universe = bucket_universe(length)
        size = len(universe)
        if size <= k:
            raise DomainError(
                f"bucket of length {length} has only {size} members, k={k}"
            )
        if sample_cap is not None and size > sample_cap:
            rng = np.random.default_rng(seed)
            query_indices = np.sort(
                rng.choice(size, size=sample_cap, replace=False)
            ).astype(np.int64)
        else:
            query_indices = np.arange(size, dtype=np.int64)

        natural_sets = [
            natural_knn(universe[0] + int(q), k, universe) for q in query_indices
        ]
        for method in methods:
            embs = universe_embeddings(universe, table, method)
            rows = _scan(embs, query_indices, k, _METRIC_CODES[metric], n_threads)
            total = 0
            for natural, row in zip(natural_sets, rows):
                embedded = {int(i) + universe[0] for i in row}
                total += len(natural & embedded)
            summaries.append(
                BucketSummary(
                    digit_length=length,
                    method=method,
                    mean_f1=total / (k * query_indices.size),
                    count=int(query_indices.size),
                )
            )
    return summaries
