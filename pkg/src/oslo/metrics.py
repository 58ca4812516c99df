"""Closed-set accuracy and rank-based outlier-detection metrics.

Outliers are the positive class throughout; a higher score means "more
likely an outlier".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .types import OUTLIER, MetricsReport, PredictionResult


@dataclass(frozen=True, eq=False)
class ScoredQuerySet:
    outlier_scores: np.ndarray
    is_outlier: np.ndarray
    hard_labels: np.ndarray
    ground_truth_labels: np.ndarray

    def __post_init__(self):
        for name, dtype in (
            ("outlier_scores", np.float64),
            ("is_outlier", bool),
            ("hard_labels", np.int64),
            ("ground_truth_labels", np.int64),
        ):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=dtype))
        n = len(self.outlier_scores)
        if not (len(self.is_outlier) == len(self.hard_labels)
                == len(self.ground_truth_labels) == n):
            raise ValueError("all query vectors must share one length")

    @classmethod
    def from_prediction(cls, result: PredictionResult, ground_truth) -> "ScoredQuerySet":
        gt = np.asarray(ground_truth)
        return cls(result.outlierness, gt == OUTLIER, result.hard_labels, gt)

    @classmethod
    def from_scores(cls, scores, is_outlier) -> "ScoredQuerySet":
        """Detection-only set (labels are placeholders)."""
        is_outlier = np.asarray(is_outlier, dtype=bool)
        gt = np.where(is_outlier, OUTLIER, 0)
        return cls(scores, is_outlier, np.zeros(len(gt), dtype=np.int64), gt)


def _split_scores(scored: ScoredQuerySet):
    pos = scored.outlier_scores[scored.is_outlier]
    neg = scored.outlier_scores[~scored.is_outlier]
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("detection metrics need at least one inlier and one outlier")
    return pos, neg


def accuracy(scored: ScoredQuerySet) -> float:
    """Fraction of inlier queries whose hard label is correct."""
    inl = ~scored.is_outlier
    if not np.any(inl):
        raise ValueError("accuracy needs at least one inlier query")
    return float(np.mean(scored.hard_labels[inl] == scored.ground_truth_labels[inl]))


def _average_ranks(x: np.ndarray) -> np.ndarray:
    order = np.argsort(x, kind="mergesort")
    sx = x[order]
    # boundaries of runs of equal values
    starts = np.flatnonzero(np.r_[True, sx[1:] != sx[:-1]])
    ends = np.r_[starts[1:], len(sx)]
    avg = (starts + ends + 1) / 2.0
    ranks = np.empty(len(x))
    ranks[order] = np.repeat(avg, ends - starts)
    return ranks


def auroc(scored: ScoredQuerySet) -> float:
    """Mann-Whitney AUROC: P(outlier score > inlier score), ties counted 1/2."""
    pos, neg = _split_scores(scored)
    ranks = _average_ranks(scored.outlier_scores)
    n_pos, n_neg = len(pos), len(neg)
    u = ranks[scored.is_outlier].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def _threshold_counts(scored: ScoredQuerySet):
    """True/false positive counts when predicting ``score >= t`` for each distinct t.

    Thresholds run from the highest score downwards.
    """
    _split_scores(scored)
    order = np.argsort(-scored.outlier_scores, kind="mergesort")
    s = scored.outlier_scores[order]
    y = scored.is_outlier[order]
    last = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp = np.cumsum(y)[last]
    fp = (last + 1) - tp
    return s[last], tp, fp, int(y.sum())


def aupr(scored: ScoredQuerySet) -> float:
    """Average precision: sum over thresholds of recall increment times precision."""
    _, tp, fp, n_pos = _threshold_counts(scored)
    d_tp = np.diff(np.r_[0, tp])
    terms = (d_tp / n_pos) * (tp / (tp + fp))
    return math.fsum(terms.tolist())


def precision_at_recall(scored: ScoredQuerySet, target_recall: float = 0.9) -> float:
    """Precision at the highest threshold whose outlier recall reaches the target."""
    if not 0.0 < target_recall <= 1.0:
        raise ValueError("target_recall must lie in (0, 1]")
    _, tp, fp, n_pos = _threshold_counts(scored)
    hit = np.flatnonzero(tp / n_pos >= target_recall)[0]
    return float(tp[hit] / (tp[hit] + fp[hit]))


def evaluate(scored: ScoredQuerySet) -> MetricsReport:
    return MetricsReport(
        accuracy(scored), auroc(scored), aupr(scored), precision_at_recall(scored)
    )


METRIC_NAMES = ("acc", "auroc", "aupr", "prec_at_090")


def aggregate(reports) -> dict:
    """Per-metric mean, sample std and 95% half-width ``1.96 * std / sqrt(n)``."""
    reports = list(reports)
    if len(reports) < 2:
        raise ValueError("aggregation needs at least two reports")
    n = len(reports)
    out = {}
    for name in METRIC_NAMES:
        values = np.array([getattr(r, name) for r in reports], dtype=np.float64)
        std = float(values.std(ddof=1))
        out[name] = {
            "mean": float(values.mean()),
            "std": std,
            "ci95": 1.96 * std / math.sqrt(n),
            "n": n,
        }
    return out
