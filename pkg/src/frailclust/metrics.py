"""Cluster quality metrics on frailty-adjusted risk scores.

The silhouette uses the absolute risk-score gap |eta_i - eta_j| as its
distance; its mean over units is the model-selection score for the cluster
count.  Accuracy aligns predicted to reference labels by the Hungarian
assignment on the confusion matrix.
"""

from dataclasses import dataclass

import numpy as np
import scipy.optimize
from sklearn.metrics import adjusted_rand_score


@dataclass
class SilhouetteReport:
    """Per-unit silhouettes plus the mean used for model selection.

    defined is False (and mean is nan) when fewer than two clusters exist.
    """

    values: np.ndarray
    mean: float
    n_clusters: int
    defined: bool


def silhouette(eta, labels):
    """Silhouette of a labeling under the |eta_i - eta_j| distance.

    Singleton clusters score 0 by convention.  A single-cluster labeling
    yields defined=False with nan mean rather than an error.
    """
    eta = np.asarray(eta, dtype=float)
    labels = np.asarray(labels)
    n = eta.shape[0]
    if labels.shape[0] != n:
        raise ValueError(f"labels length {labels.shape[0]} != scores length {n}")
    uniq, idx = np.unique(labels, return_inverse=True)
    c = uniq.shape[0]
    if c < 2:
        return SilhouetteReport(values=np.zeros(n), mean=float("nan"), n_clusters=c,
                                defined=False)
    dist = np.abs(eta[:, None] - eta[None, :])
    sizes = np.bincount(idx, minlength=c)
    # sums[i, r] = total distance from unit i to cluster r
    sums = np.zeros((n, c))
    for r in range(c):
        sums[:, r] = dist[:, idx == r].sum(axis=1)
    own = sizes[idx]
    values = np.zeros(n)
    multi = own > 1
    a = np.where(multi, sums[np.arange(n), idx] / np.maximum(own - 1, 1), 0.0)
    other = sums / sizes[None, :]
    other[np.arange(n), idx] = np.inf
    b = other.min(axis=1)
    denom = np.maximum(a, b)
    values[multi] = ((b - a) / denom)[multi]  # singletons stay 0
    return SilhouetteReport(values=values, mean=float(values.mean()), n_clusters=c,
                            defined=True)


@dataclass
class RecoveryReport:
    """Agreement between a predicted and a reference labeling."""

    accuracy: float
    ari: float
    confusion: np.ndarray
    mapping: dict


def confusion_matrix(reference, predicted):
    ref_ids, ref_idx = np.unique(reference, return_inverse=True)
    pred_ids, pred_idx = np.unique(predicted, return_inverse=True)
    table = np.zeros((ref_ids.shape[0], pred_ids.shape[0]), dtype=int)
    np.add.at(table, (ref_idx, pred_idx), 1)
    return table, ref_ids, pred_ids

def accuracy(reference, predicted):
    """Best-case label agreement under the optimal one-to-one cluster alignment."""
    table, _, _ = confusion_matrix(reference, predicted)
    rows, cols = scipy.optimize.linear_sum_assignment(table.max() - table)
    return float(table[rows, cols].sum()) / float(np.asarray(reference).shape[0])


def adjusted_rand(reference, predicted):
    """Standard adjusted Rand index; two trivial partitions agree perfectly."""
    reference = np.asarray(reference)
    predicted = np.asarray(predicted)
    if len(np.unique(reference)) == 1 and len(np.unique(predicted)) == 1:
        return 1.0
    return float(adjusted_rand_score(reference, predicted))


def recovery_report(reference, predicted):
    table, ref_ids, pred_ids = confusion_matrix(reference, predicted)
    rows, cols = scipy.optimize.linear_sum_assignment(table.max() - table)
    mapping = {pred_ids[c]: ref_ids[r] for r, c in zip(rows, cols)}
    acc = float(table[rows, cols].sum()) / float(np.asarray(reference).shape[0])
    return RecoveryReport(accuracy=acc, ari=adjusted_rand(reference, predicted),
                          confusion=table, mapping=mapping)
