"""Conversion-estimation metrics: AUC by rank-sum, mean log-loss."""

from __future__ import annotations

import numpy as np

from ..errors import MetricUndefinedError

_CLAMP = 1e-7


def auc(scores, labels) -> float:
    """Probability a random positive outranks a random negative.

    Computed by rank-sum with average ranks, so ties count half. Needs
    at least one positive and one negative label.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise MetricUndefinedError(f"scores/labels must be matching vectors, got {s.shape} and {y.shape}")
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise MetricUndefinedError("AUC needs both classes present")

    order = np.argsort(s, kind="mergesort")
    ranks = np.empty(len(s))
    sorted_scores = s[order]
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0  # average 1-based rank
        i = j + 1
    rank_sum = ranks[y == 1].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def logloss(scores, labels) -> float:
    """Mean clamped binary cross-entropy."""
    p = np.clip(np.asarray(scores, dtype=np.float64), _CLAMP, 1.0 - _CLAMP)
    y = np.asarray(labels, dtype=np.float64)
    return float(np.mean(-y * np.log(p) - (1.0 - y) * np.log(1.0 - p)))
