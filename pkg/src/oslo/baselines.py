"""Inductive baselines: nearest class mean, max-probability and k-NN detectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import softmax

from .types import DataError, Episode, PredictionResult


@dataclass(frozen=True)
class KnnConfig:
    k: int = 1
    aggregation: str = "kth_distance"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.aggregation not in ("kth_distance", "mean_of_k"):
            raise ValueError(f"unknown aggregation {self.aggregation!r}")


def support_centroids(episode: Episode) -> np.ndarray:
    """L2-normalized per-class support means, shape ``(K, d)``."""
    k = episode.n_ways
    counts = np.bincount(episode.support_labels, minlength=k)
    if np.any(counts == 0):
        raise DataError("every closed-set class needs at least one support row")
    sums = np.zeros((k, episode.support_features.shape[1]))
    np.add.at(sums, episode.support_labels, episode.support_features)
    means = sums / counts[:, None]
    return means / np.linalg.norm(means, axis=1, keepdims=True)


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def nearest_centroid_classify(episode: Episode) -> np.ndarray:
    """Posteriors ``softmax(-||x - mu_k||^2)`` over support class means."""
    mu = support_centroids(episode)
    return softmax(-_sq_dists(episode.query_features, mu), axis=1)


def max_prob_outlierness(posteriors) -> np.ndarray:
    """``1 - max_k p_ik``; ranks queries exactly like the negative max probability."""
    return 1.0 - np.max(np.asarray(posteriors), axis=1)


def knn_outlier_score(episode: Episode, config: KnnConfig = KnnConfig()) -> np.ndarray:
    """Distance from each query to its k-th nearest support vector (or mean of k)."""
    if config.k > episode.n_support:
        raise ValueError(f"k={config.k} exceeds support size {episode.n_support}")
    d = np.sqrt(_sq_dists(episode.query_features, episode.support_features))
    d.sort(axis=1)
    if config.aggregation == "kth_distance":
        return d[:, config.k - 1]
    return d[:, : config.k].mean(axis=1)


def knn_classify(episode: Episode, config: KnnConfig = KnnConfig()) -> PredictionResult:
    """Majority vote among the k nearest support vectors, with k-NN outlierness."""
    d = _sq_dists(episode.query_features, episode.support_features)
    nearest = np.argsort(d, axis=1, kind="stable")[:, : config.k]
    votes = np.zeros((episode.n_query, episode.n_ways))
    for j in range(config.k):
        votes[np.arange(episode.n_query), episode.support_labels[nearest[:, j]]] += 1
    return PredictionResult(votes / config.k, knn_outlier_score(episode, config))


def strong_baseline(episode: Episode, knn: KnnConfig = KnnConfig()) -> PredictionResult:
    """Nearest-centroid classification paired with max-scaled k-NN outlierness."""
    posteriors = nearest_centroid_classify(episode)
    raw = knn_outlier_score(episode, knn)
    top = raw.max()
    scores = raw / top if top > 0 else np.zeros_like(raw)
    return PredictionResult(posteriors, scores)


def simpleshot_maxprob(episode: Episode) -> PredictionResult:
    posteriors = nearest_centroid_classify(episode)
    return PredictionResult(posteriors, max_prob_outlierness(posteriors))
