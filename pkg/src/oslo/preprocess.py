"""Center-normalize transform with base (inductive) or task (transductive) centering."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .types import Dataset, DataError, DegenerateVectorError, Episode

EPS = 1e-12


@dataclass(frozen=True)
class CenteringMode:
    mode: str = "task"
    base_center: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.mode not in ("base", "task"):
            raise ValueError(f"unknown centering mode {self.mode!r}")
        if self.mode == "base":
            if self.base_center is None:
                raise ValueError("base centering needs a base_center")
            c = np.asarray(self.base_center, dtype=np.float64)
            if not np.all(np.isfinite(c)):
                raise ValueError("base_center must be finite")
            object.__setattr__(self, "base_center", c)


def compute_base_center(base_dataset: Dataset) -> np.ndarray:
    """Mean of every feature vector in the base split."""
    if len(base_dataset) == 0:
        raise DataError("cannot compute a base center from an empty dataset")
    return base_dataset.features.mean(axis=0)


def compute_task_center(episode: Episode) -> np.ndarray:
    """Mean over the union of support and query vectors of one episode."""
    return episode.all_features.mean(axis=0)


def center_normalize(x, center) -> np.ndarray:
    """Map ``x`` (a vector or a stack of row vectors) to ``(x - c) / ||x - c||``.

    Raises
    ------
    DegenerateVectorError
        If any row lies within ``1e-12`` of ``center``.
    """
    x = np.asarray(x, dtype=np.float64)
    diff = x - np.asarray(center, dtype=np.float64)
    norms = np.linalg.norm(diff, axis=-1, keepdims=True)
    if np.any(norms <= EPS):
        raise DegenerateVectorError("feature vector coincides with the center")
    return diff / norms


def normalize_episode(episode: Episode, centering: CenteringMode) -> Episode:
    """Apply the center-normalize transform to support and query rows."""
    if centering.mode == "task":
        center = compute_task_center(episode)
    else:
        center = centering.base_center
    return episode.with_features(
        center_normalize(episode.support_features, center),
        center_normalize(episode.query_features, center),
    )
