"""Clustering metrics against exhaustive and pair-counting oracles."""

import itertools
import math

import numpy as np
import pytest
from sklearn.metrics import silhouette_samples

from frailclust.metrics import (RecoveryReport, accuracy, adjusted_rand,
                                recovery_report, silhouette)


def accuracy_by_permutation(reference, predicted):
    """Best label agreement over every one-to-one relabeling (C <= 6)."""
    ref = np.asarray(reference)
    pred = np.asarray(predicted)
    ref_ids = np.unique(ref)
    pred_ids = np.unique(pred)
    big, small = (ref_ids, pred_ids) if len(ref_ids) >= len(pred_ids) else (pred_ids, ref_ids)
    best = 0
    for perm in itertools.permutations(big, len(small)):
        mapping = dict(zip(small, perm))
        if len(ref_ids) >= len(pred_ids):
            hits = np.sum(ref == np.vectorize(mapping.get)(pred))
        else:
            hits = np.sum(np.vectorize(mapping.get)(ref) == pred)
        best = max(best, hits)
    return best / ref.shape[0]


def ari_by_pair_counting(a, b):
    """Adjusted Rand from the contingency-table comb2 sums."""
    a = np.asarray(a)
    b = np.asarray(b)
    n = a.shape[0]
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=int)
    np.add.at(table, (ai, bi), 1)

    def comb2(x):
        return x * (x - 1) // 2

    index = sum(comb2(v) for v in table.ravel())
    row_sum = sum(comb2(v) for v in table.sum(axis=1))
    col_sum = sum(comb2(v) for v in table.sum(axis=0))
    expected = row_sum * col_sum / comb2(n)
    max_index = 0.5 * (row_sum + col_sum)
    if max_index == expected:
        return 1.0
    return (index - expected) / (max_index - expected)


# ===== accuracy =====


def test_accuracy_matches_permutation_oracle():
    rng = np.random.default_rng(31)
    for trial in range(60):
        c_ref = int(rng.integers(2, 6))
        c_pred = int(rng.integers(2, 6))
        n = int(rng.integers(10, 60))
        ref = rng.integers(0, c_ref, size=n)
        pred = rng.integers(0, c_pred, size=n)
        assert accuracy(ref, pred) == pytest.approx(
            accuracy_by_permutation(ref, pred), abs=1e-12), f"trial {trial}"


def test_accuracy_perfect_and_permuted():
    ref = np.array([1, 1, 2, 2, 3, 3])
    assert accuracy(ref, ref) == 1.0
    assert accuracy(ref, np.array([3, 3, 1, 1, 2, 2])) == 1.0  # relabeled
    assert accuracy(ref, np.array([1, 1, 1, 1, 1, 1])) == pytest.approx(2 / 6)


def test_accuracy_with_string_labels():
    ref = np.array(["a", "a", "b", "b"])
    pred = np.array([9, 9, 4, 4])
    assert accuracy(ref, pred) == 1.0


# ===== adjusted Rand =====


def test_adjusted_rand_matches_pair_counting_oracle():
    rng = np.random.default_rng(37)
    for trial in range(40):
        n = int(rng.integers(8, 50))
        a = rng.integers(0, int(rng.integers(2, 5)), size=n)
        b = rng.integers(0, int(rng.integers(2, 5)), size=n)
        assert adjusted_rand(a, b) == pytest.approx(
            ari_by_pair_counting(a, b), abs=1e-12), f"trial {trial}"


def test_adjusted_rand_edge_cases():
    assert adjusted_rand([1, 1, 1], [2, 2, 2]) == 1.0  # both trivial
    ref = np.repeat([1, 2, 3], 20)
    assert adjusted_rand(ref, ref) == 1.0
    rng = np.random.default_rng(41)
    noise = rng.integers(1, 4, size=60)
    assert abs(adjusted_rand(ref, noise)) < 0.2  # independent labelings


# ===== silhouette =====


def test_silhouette_hand_example():
    eta = np.array([0.0, 0.1, 5.0, 5.1])
    labels = np.array([1, 1, 2, 2])
    report = silhouette(eta, labels)
    assert report.defined and report.n_clusters == 2
    # unit 0: a = 0.1, b = (5.0 + 5.1)/2 = 5.05 -> s = (5.05-0.1)/5.05
    assert report.values[0] == pytest.approx((5.05 - 0.1) / 5.05, rel=1e-12)
    # unit 2: a = 0.1, b = (5.0 + 4.9)/2 = 4.95
    assert report.values[2] == pytest.approx((4.95 - 0.1) / 4.95, rel=1e-12)
    assert report.mean == pytest.approx(report.values.mean(), rel=1e-12)


def test_silhouette_matches_sklearn_where_defined():
    rng = np.random.default_rng(43)
    eta = np.concatenate([rng.normal(0, 1, 20), rng.normal(8, 1, 20), rng.normal(-7, 1, 20)])
    labels = np.repeat([1, 2, 3], 20)
    ours = silhouette(eta, labels)
    ref = silhouette_samples(eta[:, None], labels, metric="euclidean")
    np.testing.assert_allclose(ours.values, ref, atol=1e-10)


def test_silhouette_singleton_scores_zero():
    eta = np.array([0.0, 5.0, 5.2])
    labels = np.array([1, 2, 2])
    report = silhouette(eta, labels)
    assert report.values[0] == 0.0
    assert report.defined


def test_silhouette_single_cluster_undefined():
    report = silhouette(np.array([1.0, 2.0, 3.0]), np.array([1, 1, 1]))
    assert not report.defined
    assert math.isnan(report.mean)
    assert report.n_clusters == 1


def test_silhouette_length_mismatch_raises():
    with pytest.raises(ValueError):
        silhouette(np.array([1.0, 2.0]), np.array([1, 2, 2]))


# ===== recovery report =====


def test_recovery_report_mapping():
    ref = np.array([1, 1, 1, 2, 2, 3])
    pred = np.array([7, 7, 7, 5, 5, 9])
    report = recovery_report(ref, pred)
    assert isinstance(report, RecoveryReport)
    assert report.accuracy == 1.0
    assert report.ari == 1.0
    assert report.mapping == {7: 1, 5: 2, 9: 3}
    assert report.confusion.sum() == 6
