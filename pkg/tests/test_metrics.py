"""Edit distance, CER, and answer normalization.

The DP oracle fills the full (len+1) x (len+1) matrix the textbook way and
shares nothing with the kernel implementation.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from numbra.errors import DomainError
from numbra.metrics import batch_scores, cer, levenshtein, normalize_answer


def oracle_distance(a: str, b: str) -> int:
    rows = len(a) + 1
    cols = len(b) + 1
    m = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        m[i][0] = i
    for j in range(cols):
        m[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            m[i][j] = min(m[i - 1][j] + 1, m[i][j - 1] + 1, m[i - 1][j - 1] + cost)
    return m[-1][-1]


_short = st.text(alphabet="0123456789ab.", max_size=10)


class TestLevenshtein:
    @pytest.mark.parametrize(
        "a,b,expected",
        [
            ("321", "321", 0),
            ("32", "321", 1),
            ("123456", "1", 5),
            ("", "abc", 3),
            ("abc", "", 3),
            ("kitten", "sitting", 3),
            ("flaw", "lawn", 2),
            ("", "", 0),
        ],
    )
    def test_known_values(self, a, b, expected):
        assert levenshtein(a, b) == expected

    def test_matches_dp_oracle_on_random_pairs(self, rng):
        alphabet = list("0123456789abcde")
        for _ in range(1000):
            a = "".join(rng.choice(alphabet, size=rng.integers(0, 9)))
            b = "".join(rng.choice(alphabet, size=rng.integers(0, 9)))
            assert levenshtein(a, b) == oracle_distance(a, b), (a, b)

    def test_metric_axioms_on_random_triples(self, rng):
        alphabet = list("0123456789")
        strings = [
            "".join(rng.choice(alphabet, size=rng.integers(0, 7))) for _ in range(60)
        ]
        for _ in range(1000):
            a, b, c = (strings[i] for i in rng.integers(0, len(strings), size=3))
            dab = levenshtein(a, b)
            assert dab >= 0
            assert (dab == 0) == (a == b)
            assert dab == levenshtein(b, a)
            assert dab <= levenshtein(a, c) + levenshtein(c, b)

    @given(a=_short, b=_short)
    @settings(max_examples=300, deadline=None)
    def test_bounded_by_longer_length(self, a, b):
        d = levenshtein(a, b)
        assert abs(len(a) - len(b)) <= d <= max(len(a), len(b), 0)


class TestNormalizeAnswer:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            (" 42 ", "42"),
            ("42\n", "42"),
            ("7.0", "7"),
            ("120.0", "120"),
            ("0.0", "0"),
            (".0", ".0"),
            ("3.00", "3.00"),
            ("3.5", "3.5"),
            ("x.0", "x"),
            ("", ""),
            ("  7.0  ", "7"),
        ],
    )
    def test_examples(self, raw, expected):
        assert normalize_answer(raw) == expected

    def test_only_one_suffix_dropped(self):
        assert normalize_answer("5.0.0") == "5.0"


class TestCer:
    def test_exact_match(self):
        record = cer("321", "321")
        assert record.exact_match
        assert record.cer_percent == 0.0
        assert record.edit_distance == 0
        assert record.target_length == 3

    def test_single_edit(self):
        record = cer("32", "321")
        assert not record.exact_match
        assert record.cer_percent == pytest.approx(100 / 3)

    def test_can_exceed_hundred_percent(self):
        record = cer("123456", "1")
        assert record.cer_percent == 500.0
        assert record.edit_distance == 5

    def test_empty_prediction_is_total_miss(self):
        assert cer("", "42").cer_percent == 100.0

    def test_rejects_empty_gold(self):
        with pytest.raises(DomainError):
            cer("1", "")


class TestBatchScores:
    def test_matches_independent_computation(self, rng):
        alphabet = list("0123456789")
        pairs = []
        for _ in range(200):
            gold = "".join(rng.choice(alphabet, size=rng.integers(1, 6)))
            pred = "".join(rng.choice(alphabet, size=rng.integers(1, 6)))
            pairs.append((pred, gold))
        scores = batch_scores(pairs)
        exact = sum(1 for p, g in pairs if p == g)
        mean_cer = float(
            np.mean([100.0 * oracle_distance(p, g) / len(g) for p, g in pairs])
        )
        assert scores["accuracy_percent"] == pytest.approx(100.0 * exact / len(pairs))
        assert scores["mean_cer_percent"] == pytest.approx(mean_cer, abs=1e-9)

    def test_normalizes_both_sides(self):
        scores = batch_scores([("7.0", "7"), (" 42", "42.0")])
        assert scores["accuracy_percent"] == 100.0
        assert scores["mean_cer_percent"] == 0.0

    def test_mixed_batch(self):
        scores = batch_scores([("1", "1"), ("2", "1")])
        assert scores["accuracy_percent"] == 50.0
        assert scores["mean_cer_percent"] == 50.0

    def test_rejects_empty_batch(self):
        with pytest.raises(DomainError):
            batch_scores([])

    def test_rejects_pair_with_empty_normalized_gold(self):
        with pytest.raises(DomainError):
            batch_scores([("1", "  ")])
