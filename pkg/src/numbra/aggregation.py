"""Positional weighting and aggregation of digit embeddings.

The weight for position i (1-based, left to right) of an N-digit number is

    w_i = 2^(N-i) * 3(N+1-i)(N+2-i) / (N(N+1)(N+2))

so a single digit keeps its own embedding (w_1 = 1 when N = 1), leading
digits dominate exponentially, and the weights never sum to 1 for N >= 2,
which keeps "11" and "111" apart. The fractional factor is a normalised
triangular sequence: read in ascending order g_k = T_k / S with
T_k = k(k+1)/2 and S = N(N+1)(N+2)/6, consecutive differences satisfy
g_{k+1} - g_k = g_1 * (k+1) exactly.

Weights are computed in exact rational arithmetic and converted to floats at
the boundary. Five baseline aggregators (sum, mean, max, min, median) are
provided for comparison; sum and mean iterate digits in ascending sorted
order so digit-permutation invariance holds bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .embeddings import EmbeddingTable
from .errors import DomainError

# 2^(N-1) overflows well past double precision near N ~ 1024; 64 keeps every
# weight exact in float64 and is far beyond the validated 6-digit range.
MAX_DIGITS = 64


class Aggregator(Enum):
    WEIGHTED = "weighted"
    SUM = "sum"
    MEAN = "mean"
    MAX = "max"
    MIN = "min"
    MEDIAN = "median"

    @classmethod
    def from_name(cls, name: str) -> "Aggregator":
        for method in cls:
            if method.value == name:
                return method
        raise ValueError(f"unknown aggregator {name!r}")


@dataclass(frozen=True)
class WeightVector:
    """Positional weights for an N-digit number, index 0 = leftmost digit."""

    n_digits: int
    weights: tuple[float, ...]


@dataclass(frozen=True)
class AggregatedEmbedding:
    """A single vector summarizing a multi-digit number."""

    vector: np.ndarray
    source_number: str
    method: Aggregator


def _check_length(n_digits: int) -> None:
    if not 1 <= n_digits <= MAX_DIGITS:
        raise DomainError(
            f"digit count must be in 1..{MAX_DIGITS}, got {n_digits}"
        )


def exact_weights(n_digits: int) -> list[Fraction]:
    """The positional weights as exact rationals, leftmost first."""
    _check_length(n_digits)
    n = n_digits
    denom = n * (n + 1) * (n + 2)
    return [
        Fraction(2 ** (n - i)) * Fraction(3 * (n + 1 - i) * (n + 2 - i), denom)
        for i in range(1, n + 1)
    ]


def triangular_fractions(n_digits: int) -> list[Fraction]:
    """The normalised triangular factors g_1 <= ... <= g_N, ascending."""
    _check_length(n_digits)
    n = n_digits
    scale = Fraction(n * (n + 1) * (n + 2), 6)
    return [Fraction(k * (k + 1), 2) / scale for k in range(1, n + 1)]


def weights(n_digits: int) -> WeightVector:
    """Float positional weights for an N-digit number."""
    return WeightVector(n_digits, tuple(float(w) for w in exact_weights(n_digits)))


def weights_array(n_digits: int) -> np.ndarray:
    return np.array(weights(n_digits).weights, dtype=np.float64)


def _gather(digits: str, table: EmbeddingTable) -> list[np.ndarray]:
    if not digits:
        raise DomainError("cannot aggregate an empty string")
    _check_length(len(digits))
    return [table.vector(c) for c in digits]


def aggregate(
    digits: str, table: EmbeddingTable, method: Aggregator = Aggregator.WEIGHTED
) -> AggregatedEmbedding:
    """Aggregate the character embeddings of *digits* into one vector.

    Every character (digits, and the decimal point if present) occupies one
    position. Median of an even count is the mean of the two middle values.
    """
    vectors = _gather(digits, table)
    n = len(vectors)
    if method is Aggregator.WEIGHTED:
        w = weights(n).weights
        out = np.zeros(table.dim)
        for wi, vec in zip(w, vectors):
            out += wi * vec
    elif method in (Aggregator.SUM, Aggregator.MEAN):
        out = np.zeros(table.dim)
        for _, vec in sorted(zip(digits, vectors), key=lambda pair: pair[0]):
            out += vec
        if method is Aggregator.MEAN:
            out = out / n
    elif method is Aggregator.MAX:
        out = vectors[0].copy()
        for vec in vectors[1:]:
            np.maximum(out, vec, out=out)
    elif method is Aggregator.MIN:
        out = vectors[0].copy()
        for vec in vectors[1:]:
            np.minimum(out, vec, out=out)
    else:
        stacked = np.sort(np.stack(vectors), axis=0)
        mid = n // 2
        if n % 2:
            out = stacked[mid].copy()
        else:
            out = (stacked[mid - 1] + stacked[mid]) / 2.0
    return AggregatedEmbedding(out, digits, method)


def aggregate_soft(
    digit_distributions: np.ndarray,
    table: EmbeddingTable,
    alphabet: tuple[str, ...] = tuple("0123456789"),
) -> AggregatedEmbedding:
    """Positionally weighted aggregation of per-position digit distributions.

    Row i of *digit_distributions* is a probability vector over *alphabet*;
    position i contributes w_i * sum_s p_i(s) e(s). Equals the weighted
    aggregate of the corresponding string when every row is one-hot. The
    result carries an empty source_number, there being no single source
    string.
    """
    dists = np.asarray(digit_distributions, dtype=np.float64)
    if dists.ndim != 2 or dists.shape[0] == 0:
        raise DomainError("distributions must be a non-empty 2-D array")
    if dists.shape[1] != len(alphabet):
        raise DomainError(
            f"distributions have {dists.shape[1]} columns, alphabet has {len(alphabet)}"
        )
    if np.any(dists < 0) or np.any(np.abs(dists.sum(axis=1) - 1.0) > 1e-9):
        raise DomainError("each row must be non-negative and sum to 1")
    n = dists.shape[0]
    symbol_vectors = np.stack([table.vector(s) for s in alphabet])
    w = weights_array(n)
    out = np.zeros(table.dim)
    for i in range(n):
        # expected embedding at position i, then the positional weight;
        # accumulation order matches the hard weighted aggregate so one-hot
        # rows reduce to it exactly
        expected = dists[i] @ symbol_vectors
        out += w[i] * expected
    return AggregatedEmbedding(out, "", Aggregator.WEIGHTED)
