"""Cluster-quality measures on whole labeled feature sets.

``mean_imposture_factor`` (MIF) averages, over classes ``k`` and non-members
``z``, the fraction of class-``k`` members lying strictly farther from the
class centroid than ``z``. Zero means every class is tighter than any
outsider; shuffled labels give about one half.
"""

from __future__ import annotations

import numpy as np

from .types import Dataset, DataError


def class_centroids(dataset: Dataset) -> dict:
    """Arithmetic mean of each class's feature vectors."""
    if len(dataset) == 0:
        raise DataError("empty dataset")
    x = dataset.features
    return {c: x[rows].mean(axis=0) for c, rows in dataset.class_indices().items()}


def _members(dataset: Dataset, k: int) -> np.ndarray:
    rows = np.flatnonzero(dataset.labels == k)
    if len(rows) == 0:
        raise DataError(f"class {k} has no members")
    return rows


def imposture_factor(z, k: int, dataset: Dataset) -> float:
    """Fraction of class-``k`` members strictly farther from the centroid than ``z``."""
    rows = _members(dataset, k)
    members = dataset.features[rows]
    mu = members.mean(axis=0)
    d_members = np.linalg.norm(members - mu, axis=1)
    d_z = np.linalg.norm(np.asarray(z, dtype=np.float64) - mu)
    return float(np.mean(d_members > d_z))


def per_class_imposture(dataset: Dataset) -> dict:
    """Mean imposture factor of each class over all of its non-members."""
    x = dataset.features
    labels = dataset.labels
    out = {}
    for k, rows in dataset.class_indices().items():
        mu = x[rows].mean(axis=0)
        dist = np.linalg.norm(x - mu, axis=1)
        member = labels == k
        d_members = np.sort(dist[member])
        d_out = dist[~member]
        # members strictly farther than each outsider
        farther = len(d_members) - np.searchsorted(d_members, d_out, side="right")
        out[k] = float(np.mean(farther / len(d_members)))
    return out


def mean_imposture_factor(dataset: Dataset) -> float:
    if len(dataset.classes) < 2:
        raise DataError("MIF needs at least two classes")
    return float(np.mean(list(per_class_imposture(dataset).values())))


def variance_ratio(dataset: Dataset) -> float:
    """Mean within-class scatter over mean scatter of centroids around the global mean.

    Within-class scatter is the mean squared distance of a class's members to
    their centroid; both numerator and denominator weight classes equally.
    """
    if len(dataset.classes) < 2:
        raise DataError("variance ratio needs at least two classes")
    x = dataset.features
    cents = class_centroids(dataset)
    intra = [
        np.mean(np.sum((x[rows] - cents[c]) ** 2, axis=1))
        for c, rows in dataset.class_indices().items()
    ]
    mus = np.array(list(cents.values()))
    center = x.mean(axis=0)
    inter = np.mean(np.sum((mus - center) ** 2, axis=1))
    if inter <= 1e-300:
        raise DataError("class centroids coincide; inter-class variance is zero")
    return float(np.mean(intra) / inter)
