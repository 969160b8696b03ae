"""Answer-string scoring: exact match and character error rate.

CER is the character-level edit distance as a percentage of the gold
length, so it can exceed 100 when the prediction is much longer than the
gold. Normalization before scoring is deliberately minimal: surrounding
whitespace and a single trailing ".0" are dropped, nothing else.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _kernels
from .errors import DomainError


@dataclass(frozen=True)
class MetricRecord:
    """Per-pair score: cer_percent == 100 * edit_distance / target_length."""

    exact_match: bool
    cer_percent: float
    edit_distance: int
    target_length: int


def levenshtein(a: str, b: str) -> int:
    """Minimum insertions + deletions + substitutions turning a into b."""
    return _kernels.levenshtein(a, b)


def normalize_answer(text: str) -> str:
    """Strip surrounding whitespace and one trailing ".0" if present."""
    out = text.strip()
    if len(out) > 2 and out.endswith(".0"):
        out = out[:-2]
    return out


def cer(pred: str, gold: str) -> MetricRecord:
    """Score one prediction against a non-empty gold string."""
    if not gold:
        raise DomainError("gold must be non-empty")
    distance = levenshtein(pred, gold)
    return MetricRecord(
        exact_match=distance == 0,
        cer_percent=100.0 * distance / len(gold),
        edit_distance=distance,
        target_length=len(gold),
    )


def batch_scores(pairs: list[tuple[str, str]]) -> dict[str, float]:
    """Accuracy and mean CER over normalized prediction/gold pairs."""
    if not pairs:
        raise DomainError("at least one pair required")
    records = [cer(normalize_answer(p), normalize_answer(g)) for p, g in pairs]
    exact = sum(1 for r in records if r.exact_match)
    return {
        "accuracy_percent": 100.0 * exact / len(records),
        "mean_cer_percent": sum(r.cer_percent for r in records) / len(records),
    }
