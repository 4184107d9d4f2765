"""Mask-scoring metrics: hand oracles and edge conventions."""

import numpy as np
import pytest

from causal_scope import aggregate, score_mask


def test_hand_example():
    # predicted {0,1,2}, truth {1,2,3}: TP=2, FP=1, FN=1.
    s = score_mask([1, 1, 1, 0], [0, 1, 1, 1])
    assert s.precision == pytest.approx(2 / 3)
    assert s.recall == pytest.approx(2 / 3)
    assert s.f1 == pytest.approx(2 / 3)
    assert (s.true_positives, s.false_positives, s.false_negatives) == (2, 1, 1)


def test_perfect_mask():
    s = score_mask([1, 0, 1], [1, 0, 1])
    assert (s.precision, s.recall, s.f1) == (1.0, 1.0, 1.0)


def test_empty_prediction_precision_is_one():
    s = score_mask([0, 0, 0], [1, 0, 1])
    assert s.precision == 1.0
    assert s.recall == 0.0
    assert s.f1 == 0.0


def test_empty_truth_recall_is_one():
    s = score_mask([1, 0, 0], [0, 0, 0])
    assert s.recall == 1.0
    assert s.precision == 0.0
    assert s.f1 == 0.0


def test_both_empty():
    s = score_mask([0, 0], [0, 0])
    assert (s.precision, s.recall, s.f1) == (1.0, 1.0, 1.0)


def test_f1_is_harmonic_mean():
    s = score_mask([1, 1, 0, 0], [1, 0, 1, 1])
    p, r = s.precision, s.recall
    assert s.f1 == pytest.approx(2 * p * r / (p + r))


def test_f1_zero_iff_no_true_positives():
    assert score_mask([1, 0], [0, 1]).f1 == 0.0
    assert score_mask([1, 1], [0, 1]).f1 > 0.0


def test_f1_bounded_by_extremes():
    rng = np.random.default_rng(0)
    for _ in range(200):
        pred = rng.integers(0, 2, size=12)
        truth = rng.integers(0, 2, size=12)
        s = score_mask(pred, truth)
        assert min(s.precision, s.recall) - 1e-12 <= s.f1 <= max(s.precision, s.recall) + 1e-12


def test_length_mismatch():
    with pytest.raises(ValueError):
        score_mask([1, 0], [1, 0, 1])


def test_aggregate_hand_example():
    x = score_mask([1] * 5, [1] * 5)  # precision 1.0
    y = score_mask([1] * 5, [1, 1, 1, 1, 0])  # precision 0.8
    agg = aggregate([x, y])
    assert agg["precision_mean"] == pytest.approx(0.9)
    assert agg["precision_std"] == pytest.approx(np.std([1.0, 0.8], ddof=1), abs=1e-12)


def test_aggregate_single_score_std_zero():
    agg = aggregate([score_mask([1], [1])])
    assert agg["f1_std"] == 0.0


def test_aggregate_empty_rejected():
    with pytest.raises(ValueError):
        aggregate([])
