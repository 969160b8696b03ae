"""Training losses for digit-level numeric answers.

The auxiliary loss scores a predicted number string by the log-scale
distance between the weighted aggregations of prediction and gold, with a
fixed penalty for non-numeric predictions. It interpolates with standard
cross-entropy through a single lambda. A differentiable surrogate replaces
the argmax-decoded prediction with per-position digit distributions so the
toy trainer can backpropagate through the aggregation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .aggregation import Aggregator, aggregate, aggregate_soft, weights_array
from .embeddings import DIGITS, EmbeddingTable
from .errors import DomainError
from .lexer import is_number_string

AUX_PENALTY = 20.0
AUX_CEIL = 20.0
AUX_FLOOR = -20.0
DEFAULT_LAMBDA = 0.65
LAMBDA_GRID = tuple(round(0.40 + 0.05 * i, 2) for i in range(9))

_DIGITS_ONLY = re.compile(r"\d+")
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class PredictionPair:
    """A model prediction next to its gold answer string.

    The gold side must be a well-formed number string; the prediction may
    be arbitrary text (malformedness is scored, not rejected).
    """

    predicted: str
    gold: str

    def __post_init__(self) -> None:
        if not is_number_string(self.gold):
            raise DomainError(f"gold is not a well-formed number string: {self.gold!r}")


@dataclass(frozen=True)
class LossBreakdown:
    """Combined objective with its components; total = lam*ce + (1-lam)*aux."""

    ce: float
    aux: float
    lam: float
    total: float


def _clamped_log2(distance: float) -> float:
    """log2 of a distance, clamped so the result stays in [-20, 20]."""
    if distance <= 2.0**AUX_FLOOR:
        return AUX_FLOOR
    value = math.log2(distance)
    if value >= AUX_CEIL:
        return AUX_CEIL
    if value <= AUX_FLOOR:
        return AUX_FLOOR
    return value


def aux_loss(pair: PredictionPair, table: EmbeddingTable) -> float:
    """Aggregation distance loss for a prediction/gold pair.

    A prediction that is not a well-formed number earns the fixed penalty
    20. Otherwise the result is log2 of the Euclidean distance between the
    weighted aggregations of the two strings, clamped to [-20, 20]; an
    exact match bottoms out at -20.
    """
    if not is_number_string(pair.predicted):
        return AUX_PENALTY
    wp = aggregate(pair.predicted, table, Aggregator.WEIGHTED).vector
    wl = aggregate(pair.gold, table, Aggregator.WEIGHTED).vector
    return _clamped_log2(float(np.linalg.norm(wp - wl)))


def combined_loss(ce: float, aux: float, lam: float) -> LossBreakdown:
    """Interpolate cross-entropy and auxiliary loss: lam*ce + (1-lam)*aux."""
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"lambda must be in [0, 1], got {lam}")
    if not math.isfinite(ce) or ce < 0.0:
        raise DomainError(f"ce must be a finite non-negative real, got {ce}")
    if not math.isfinite(aux):
        raise DomainError(f"aux must be finite, got {aux}")
    return LossBreakdown(ce=ce, aux=aux, lam=lam, total=lam * ce + (1.0 - lam) * aux)


def soft_aux_loss(
    digit_distributions: np.ndarray,
    gold: str,
    table: EmbeddingTable,
) -> tuple[float, np.ndarray]:
    """Differentiable surrogate of aux_loss for distribution-valued digits.

    Row i of digit_distributions is a probability vector over the digit
    alphabet for position i; the expected digit embeddings are aggregated
    with the same positional weights as the hard loss. Returns the clamped
    log2 distance to the gold aggregation and the analytic gradient with
    respect to every distribution entry (zero inside the clamp regions,
    where the loss is locally constant).

    The position count is pinned to the gold length, so gold must be a
    plain digit string of matching length.
    """
    dists = np.asarray(digit_distributions, dtype=np.float64)
    if dists.ndim != 2:
        raise DomainError(f"distributions must be 2-D, got shape {dists.shape}")
    if not _DIGITS_ONLY.fullmatch(gold):
        raise DomainError(f"gold must be a non-empty digit string: {gold!r}")
    n, alphabet = dists.shape
    if n != len(gold):
        raise DomainError(
            f"{n} distributions for a gold string of length {len(gold)}"
        )
    if alphabet != len(DIGITS):
        raise DomainError(f"distribution rows must cover {len(DIGITS)} digits")

    predicted = aggregate_soft(dists, table).vector
    gold_vec = aggregate(gold, table, Aggregator.WEIGHTED).vector
    diff = predicted - gold_vec
    distance = float(np.linalg.norm(diff))
    value = _clamped_log2(distance)
    if value in (AUX_FLOOR, AUX_CEIL):
        return value, np.zeros_like(dists)
    # d loss / d p[i, s] = w_i * (diff . e_s) / (distance^2 * ln 2)
    symbol_matrix = table.digit_matrix()
    projections = symbol_matrix @ diff
    grad = np.outer(weights_array(n), projections) / (distance * distance * _LN2)
    return value, grad


def cross_entropy(
    logits: np.ndarray, targets: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy over positions, in nats, with gradients.

    logits has one row per position over the output alphabet; targets holds
    the gold symbol index per position. The gradient is (softmax - onehot)
    divided by the position count.
    """
    z = np.asarray(logits, dtype=np.float64)
    t = np.asarray(targets)
    if z.ndim != 2:
        raise DomainError(f"logits must be 2-D, got shape {z.shape}")
    if t.ndim != 1 or t.shape[0] != z.shape[0]:
        raise DomainError("one target index per logit row required")
    if not np.issubdtype(t.dtype, np.integer):
        raise DomainError("targets must be integers")
    n, alphabet = z.shape
    if n == 0:
        raise DomainError("at least one position required")
    if t.min() < 0 or t.max() >= alphabet:
        raise DomainError(f"targets must lie in [0, {alphabet - 1}]")

    shifted = z - z.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    softmax = exp / exp.sum(axis=1, keepdims=True)
    log_probs = shifted - np.log(exp.sum(axis=1, keepdims=True))
    rows = np.arange(n)
    value = float(-log_probs[rows, t].mean())
    grad = softmax
    grad[rows, t] -= 1.0
    grad /= n
    return value, grad
