"""Auxiliary loss, lambda interpolation, and the differentiable surrogates."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from numbra.aggregation import Aggregator, aggregate
from numbra.embeddings import EmbeddingTable, synth_table
from numbra.errors import DomainError
from numbra.loss import (
    AUX_CEIL,
    AUX_FLOOR,
    AUX_PENALTY,
    DEFAULT_LAMBDA,
    LAMBDA_GRID,
    PredictionPair,
    aux_loss,
    combined_loss,
    cross_entropy,
    soft_aux_loss,
)

_number = st.one_of(
    st.integers(min_value=0, max_value=10**8).map(str),
    st.floats(min_value=0, max_value=1e5, allow_nan=False).map(lambda x: f"{x:.2f}"),
)


def axis_table():
    # orthonormal digit axes keep distances hand-computable
    entries = {}
    for d in range(10):
        v = np.zeros(10)
        v[d] = 1.0
        entries[str(d)] = v
    return EmbeddingTable(entries)


class TestPredictionPair:
    def test_accepts_arbitrary_prediction(self):
        PredictionPair("not a number", "42")

    @pytest.mark.parametrize("gold", ["", "cat", "1.2.3", "-5", "4 2"])
    def test_rejects_malformed_gold(self, gold):
        with pytest.raises(DomainError):
            PredictionPair("1", gold)


class TestAuxLoss:
    def test_malformed_prediction_earns_fixed_penalty(self, table8):
        assert aux_loss(PredictionPair("cat", "321"), table8) == AUX_PENALTY
        assert aux_loss(PredictionPair("", "321"), table8) == 20.0
        assert aux_loss(PredictionPair("3-1", "321"), table8) == 20.0

    def test_exact_match_bottoms_out(self, table8):
        assert aux_loss(PredictionPair("321", "321"), table8) == AUX_FLOOR
        assert aux_loss(PredictionPair("7", "7"), table8) == -20.0

    def test_hand_value_on_axis_table(self):
        # W("10") = (w1, w2) on axes 1 and 0, W("11") puts w1+w2 on axis 1;
        # the gap is 0.25 on two axes, distance 2^-1.5
        value = aux_loss(PredictionPair("10", "11"), axis_table())
        assert value == pytest.approx(-1.5, abs=1e-12)

    def test_symmetric_for_well_formed_pairs(self, table8):
        a = aux_loss(PredictionPair("320", "321"), table8)
        b = aux_loss(PredictionPair("321", "320"), table8)
        assert a == b

    def test_nearer_number_scores_lower(self, table8):
        near = aux_loss(PredictionPair("320", "321"), table8)
        far = aux_loss(PredictionPair("456", "321"), table8)
        assert near < far

    def test_last_digit_substitution_orders_by_embedding_gap(self, table8):
        # with only the last digit changed the distance is w_N times the
        # digit-embedding gap, so aux ordering must follow that gap
        gold = "321"
        gaps = {}
        losses = {}
        for d in "023456789":
            gaps[d] = float(np.linalg.norm(table8.vector(d) - table8.vector("1")))
            losses[d] = aux_loss(PredictionPair("32" + d, gold), table8)
        by_gap = sorted(gaps, key=gaps.get)
        by_loss = sorted(losses, key=losses.get)
        assert by_gap == by_loss

    @given(pred=_number, gold=_number)
    @settings(max_examples=300, deadline=None)
    def test_bounded_on_random_pairs(self, pred, gold):
        table = synth_table(dim=6, seed=4)
        value = aux_loss(PredictionPair(pred, gold), table)
        assert AUX_FLOOR <= value <= AUX_CEIL


class TestCombinedLoss:
    def test_dyadic_affine_identities_exact(self):
        assert combined_loss(2.0, 4.0, 0.5).total == 3.0
        assert combined_loss(4.0, 8.0, 0.25).total == 7.0
        assert combined_loss(2.0, -8.0, 0.75).total == -0.5

    def test_endpoints_exact(self):
        assert combined_loss(3.25, -7.5, 1.0).total == 3.25
        assert combined_loss(3.25, -7.5, 0.0).total == -7.5

    def test_worked_example(self):
        breakdown = combined_loss(2.0, 5.0, 0.6)
        assert breakdown.total == 3.2
        assert breakdown.ce == 2.0
        assert breakdown.aux == 5.0
        assert breakdown.lam == 0.6

    def test_grid_values_accepted(self):
        assert LAMBDA_GRID == (0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80)
        for lam in LAMBDA_GRID:
            out = combined_loss(1.0, 1.0, lam)
            assert out.total == pytest.approx(1.0, abs=1e-15)
        assert DEFAULT_LAMBDA in LAMBDA_GRID

    @pytest.mark.parametrize("lam", [-0.01, 1.01, 2.0])
    def test_rejects_lambda_outside_unit_interval(self, lam):
        with pytest.raises(DomainError):
            combined_loss(1.0, 1.0, lam)

    def test_rejects_negative_or_non_finite_ce(self):
        with pytest.raises(DomainError):
            combined_loss(-0.5, 1.0, 0.5)
        with pytest.raises(DomainError):
            combined_loss(math.inf, 1.0, 0.5)

    def test_rejects_non_finite_aux(self):
        with pytest.raises(DomainError):
            combined_loss(1.0, math.nan, 0.5)


def one_hot_rows(digits):
    rows = np.zeros((len(digits), 10))
    for i, c in enumerate(digits):
        rows[i, int(c)] = 1.0
    return rows


def random_dists(rng, n):
    z = rng.normal(size=(n, 10))
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


class TestSoftAuxLoss:
    def test_one_hot_matches_hard_loss(self, table8):
        for pred, gold in [("320", "321"), ("11", "42"), ("9", "3")]:
            soft, _ = soft_aux_loss(one_hot_rows(pred), gold, table8)
            hard = aux_loss(PredictionPair(pred, gold), table8)
            assert soft == hard

    def test_exact_match_clamps_with_zero_gradient(self, table8):
        value, grad = soft_aux_loss(one_hot_rows("321"), "321", table8)
        assert value == AUX_FLOOR
        assert np.array_equal(grad, np.zeros((3, 10)))

    def test_gradient_matches_finite_differences(self, table8, rng):
        # perturbations must stay on the simplex, so probe tangent
        # directions e_j - e_j' and compare gradient differences
        dists = random_dists(rng, 3)
        value, grad = soft_aux_loss(dists, "321", table8)
        assert AUX_FLOOR < value < AUX_CEIL
        eps = 1e-6
        for i in range(3):
            for j in range(10):
                jp = (j + 3) % 10
                up = dists.copy()
                up[i, j] += eps
                up[i, jp] -= eps
                down = dists.copy()
                down[i, j] -= eps
                down[i, jp] += eps
                fd = (
                    soft_aux_loss(up, "321", table8)[0]
                    - soft_aux_loss(down, "321", table8)[0]
                ) / (2 * eps)
                analytic = grad[i, j] - grad[i, jp]
                assert fd == pytest.approx(analytic, rel=1e-4, abs=1e-8)

    def test_rejects_length_mismatch(self, table8):
        with pytest.raises(DomainError):
            soft_aux_loss(one_hot_rows("32"), "321", table8)

    def test_rejects_non_digit_gold(self, table8):
        with pytest.raises(DomainError):
            soft_aux_loss(one_hot_rows("31"), "3.1", table8)
        with pytest.raises(DomainError):
            soft_aux_loss(one_hot_rows("3"), "", table8)

    def test_rejects_wrong_alphabet_width(self, table8):
        with pytest.raises(DomainError):
            soft_aux_loss(np.full((2, 9), 1 / 9), "32", table8)

    def test_rejects_1d_input(self, table8):
        with pytest.raises(DomainError):
            soft_aux_loss(np.full(10, 0.1), "3", table8)


class TestCrossEntropy:
    def test_uniform_logits_give_log_alphabet(self):
        value, _ = cross_entropy(np.zeros((4, 12)), np.array([0, 3, 7, 11]))
        assert value == pytest.approx(math.log(12), abs=1e-12)

    def test_confident_correct_logits_near_zero(self):
        logits = np.full((2, 5), -100.0)
        logits[0, 1] = 100.0
        logits[1, 4] = 100.0
        value, _ = cross_entropy(logits, np.array([1, 4]))
        assert value == pytest.approx(0.0, abs=1e-12)

    def test_gradient_rows_sum_to_zero(self, rng):
        logits = rng.normal(size=(5, 8))
        _, grad = cross_entropy(logits, rng.integers(0, 8, size=5))
        assert np.allclose(grad.sum(axis=1), 0.0, atol=1e-14)

    def test_gradient_matches_finite_differences(self, rng):
        logits = rng.normal(size=(4, 6))
        targets = rng.integers(0, 6, size=4)
        _, grad = cross_entropy(logits, targets)
        eps = 1e-6
        for i in range(4):
            for j in range(6):
                up = logits.copy()
                up[i, j] += eps
                down = logits.copy()
                down[i, j] -= eps
                fd = (cross_entropy(up, targets)[0] - cross_entropy(down, targets)[0]) / (
                    2 * eps
                )
                assert fd == pytest.approx(grad[i, j], rel=1e-5, abs=1e-9)

    def test_stable_under_large_logit_shifts(self):
        logits = np.array([[1000.0, 1001.0, 999.0]])
        value, grad = cross_entropy(logits, np.array([1]))
        assert math.isfinite(value)
        assert np.all(np.isfinite(grad))

    def test_rejects_bad_shapes_and_targets(self):
        with pytest.raises(DomainError):
            cross_entropy(np.zeros(5), np.array([0]))
        with pytest.raises(DomainError):
            cross_entropy(np.zeros((2, 5)), np.array([0]))
        with pytest.raises(DomainError):
            cross_entropy(np.zeros((2, 5)), np.array([0.0, 1.0]))
        with pytest.raises(DomainError):
            cross_entropy(np.zeros((2, 5)), np.array([0, 5]))
        with pytest.raises(DomainError):
            cross_entropy(np.zeros((0, 5)), np.array([], dtype=np.int64))
