"""Domain types shared across the package.

Feature matrices are plain ``float64`` numpy arrays. Containers are frozen
dataclasses; the only mutable-looking object is :class:`SolverState`, which
the solver replaces wholesale at every block update.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

#: Ground-truth label carried by open-set queries. Always outside ``[0, K)``.
OUTLIER = -1

SPLITS = ("base", "validation", "test")


class DataError(ValueError):
    """Input data violates a structural invariant."""


class DegenerateVectorError(ValueError):
    """A feature vector coincides with its centering vector."""


@dataclass(frozen=True)
class FeatureRecord:
    id: str
    class_label: int
    features: np.ndarray


@dataclass(frozen=True)
class Dataset:
    """A collection of feature records from one split.

    ``split`` is ``None`` when the records were loaded without filtering and
    span several splits. Stacked views (``features``, ``labels``, ``ids``)
    are computed on first access and require a uniform dimension.
    """

    records: tuple
    split: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if self.split is not None and self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")

    @classmethod
    def from_arrays(cls, features, labels, ids=None, split=None) -> "Dataset":
        features = np.asarray(features, dtype=np.float64)
        labels = np.asarray(labels)
        if ids is None:
            ids = [f"r{i}" for i in range(len(labels))]
        records = tuple(
            FeatureRecord(str(i), int(y), np.array(x, dtype=np.float64))
            for i, y, x in zip(ids, labels, features)
        )
        return cls(records, split)

    def __len__(self):
        return len(self.records)

    @property
    def dim(self) -> int:
        return len(self.records[0].features) if self.records else 0

    @cached_property
    def features(self) -> np.ndarray:
        dims = {len(r.features) for r in self.records}
        if len(dims) > 1:
            raise DataError(f"mixed feature dimensions {sorted(dims)}")
        if not self.records:
            return np.zeros((0, 0))
        return np.vstack([r.features for r in self.records]).astype(np.float64)

    @cached_property
    def labels(self) -> np.ndarray:
        return np.array([r.class_label for r in self.records], dtype=np.int64)

    @cached_property
    def ids(self) -> list:
        return [r.id for r in self.records]

    @cached_property
    def classes(self) -> np.ndarray:
        """Sorted distinct class labels."""
        return np.unique(self.labels)

    def class_indices(self) -> dict:
        """Map each class label to the (sorted) row indices of its records."""
        labels = self.labels
        return {int(c): np.flatnonzero(labels == c) for c in self.classes}

    def subset(self, mask_or_idx, split=None) -> "Dataset":
        idx = np.arange(len(self))[mask_or_idx]
        return Dataset(tuple(self.records[i] for i in idx), split)


def validate_dataset(dataset: Dataset) -> list:
    """Return a list of human-readable invariant violations (empty if valid)."""
    violations = []
    if not dataset.records:
        return ["dataset has no records"]
    dim = len(dataset.records[0].features)
    seen_ids = set()
    for r in dataset.records:
        x = np.asarray(r.features)
        if x.ndim != 1:
            violations.append(f"record {r.id}: features must be a vector")
            continue
        if len(x) != dim:
            violations.append(
                f"record {r.id}: dimension {len(x)} differs from {dim}"
            )
        if not np.all(np.isfinite(x)):
            violations.append(f"record {r.id}: non-finite feature value")
        if r.id in seen_ids:
            violations.append(f"record {r.id}: duplicate id")
        seen_ids.add(r.id)
    return violations


def check_disjoint_splits(datasets: dict) -> list:
    """Violations of pairwise class-set disjointness between splits."""
    violations = []
    names = sorted(datasets)
    for a_i, a in enumerate(names):
        for b in names[a_i + 1:]:
            shared = set(datasets[a].classes.tolist()) & set(
                datasets[b].classes.tolist()
            )
            if shared:
                violations.append(
                    f"splits {a} and {b} share classes {sorted(shared)[:10]}"
                )
    return violations


@dataclass(frozen=True)
class EpisodeSpec:
    n_ways: int = 5
    n_shots: int = 1
    n_query_per_class: int = 15
    n_open_classes: int = 5
    mode: str = "standard"
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_ways < 2:
            raise ValueError("n_ways must be >= 2")
        if self.n_shots < 1 or self.n_query_per_class < 1:
            raise ValueError("n_shots and n_query_per_class must be >= 1")
        if self.mode not in ("standard", "broad"):
            raise ValueError(f"unknown episode mode {self.mode!r}")
        if self.mode == "standard" and self.n_open_classes < 1:
            raise ValueError("standard mode requires n_open_classes >= 1")

    @property
    def n_queries(self) -> int:
        if self.mode == "broad":
            return 2 * self.n_query_per_class * self.n_ways
        return self.n_query_per_class * (self.n_ways + self.n_open_classes)


@dataclass(frozen=True, eq=False)
class Episode:
    """One few-shot open-set task.

    ``ground_truth_labels`` uses :data:`OUTLIER` for open-set queries and must
    never be read by a solver. The id/class fields are provenance for audits.
    """

    support_features: np.ndarray
    support_labels: np.ndarray
    query_features: np.ndarray
    ground_truth_labels: np.ndarray
    n_ways: int
    support_ids: tuple = ()
    query_ids: tuple = ()
    closed_classes: tuple = ()
    open_classes: tuple = ()

    def __post_init__(self):
        s = np.asarray(self.support_features, dtype=np.float64)
        q = np.asarray(self.query_features, dtype=np.float64)
        y = np.asarray(self.support_labels, dtype=np.int64)
        gt = np.asarray(self.ground_truth_labels, dtype=np.int64)
        object.__setattr__(self, "support_features", s)
        object.__setattr__(self, "query_features", q)
        object.__setattr__(self, "support_labels", y)
        object.__setattr__(self, "ground_truth_labels", gt)
        if s.ndim != 2 or q.ndim != 2 or s.shape[1] != q.shape[1]:
            raise DataError("support and query must be 2-D with equal width")
        if len(y) != len(s) or len(gt) != len(q):
            raise DataError("label arrays do not match feature rows")
        if np.any((y < 0) | (y >= self.n_ways)):
            raise DataError("support labels must lie in [0, n_ways)")
        bad = (gt != OUTLIER) & ((gt < 0) | (gt >= self.n_ways))
        if np.any(bad):
            raise DataError("query labels must lie in [0, n_ways) or be OUTLIER")

    @property
    def n_support(self) -> int:
        return len(self.support_labels)

    @property
    def n_query(self) -> int:
        return len(self.query_features)

    @property
    def is_outlier(self) -> np.ndarray:
        return self.ground_truth_labels == OUTLIER

    @cached_property
    def all_features(self) -> np.ndarray:
        """Support rows followed by query rows."""
        return np.vstack([self.support_features, self.query_features])

    def with_features(self, support, query) -> "Episode":
        return Episode(
            support, self.support_labels, query, self.ground_truth_labels,
            self.n_ways, self.support_ids, self.query_ids,
            self.closed_classes, self.open_classes,
        )


@dataclass(frozen=True)
class SolverConfig:
    lambda_z: float = 1.0
    lambda_xi: float = 1.0
    max_iters: int = 100
    rel_tol: float = 1e-6
    likelihood_offset: float = 0.0
    fix_xi_to_one: bool = False
    normalize_centroids: bool = True

    def __post_init__(self):
        if not self.lambda_z > 0 or not self.lambda_xi > 0:
            raise ValueError("lambda_z and lambda_xi must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.rel_tol < 0:
            raise ValueError("rel_tol must be >= 0")


SIMPLEX_TOL = 1e-9
UNIT_TOL = 1e-9


@dataclass
class SolverState:
    """Iterate of the block-coordinate ascent.

    Rows ``0 .. n_support-1`` of ``assignments`` and ``inlierness`` belong to
    the support set and are pinned to one-hot labels and 1 respectively.
    The constructor rejects any state breaking those constraints.
    """

    centroids: np.ndarray
    assignments: np.ndarray
    inlierness: np.ndarray
    support_labels: np.ndarray
    iteration: int = 0
    objective: float = float("nan")
    unit_centroids: bool = True

    def __post_init__(self):
        self.centroids = np.asarray(self.centroids, dtype=np.float64)
        self.assignments = np.asarray(self.assignments, dtype=np.float64)
        self.inlierness = np.asarray(self.inlierness, dtype=np.float64)
        self.support_labels = np.asarray(self.support_labels, dtype=np.int64)
        self._check()

    @property
    def n_support(self) -> int:
        return len(self.support_labels)

    def _check(self):
        mu, z, xi = self.centroids, self.assignments, self.inlierness
        if mu.ndim != 2 or z.ndim != 2 or xi.ndim != 1:
            raise ValueError("bad state array ranks")
        n, k = z.shape
        if mu.shape[0] != k or len(xi) != n or self.n_support > n:
            raise ValueError("inconsistent state shapes")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(z))
                and np.all(np.isfinite(xi))):
            raise ValueError("state contains non-finite values")
        if np.any(z < 0) or np.any(np.abs(z.sum(axis=1) - 1) > SIMPLEX_TOL):
            raise ValueError("assignment rows must lie on the simplex")
        if np.any(xi < 0) or np.any(xi > 1):
            raise ValueError("inlierness must lie in [0, 1]")
        ns = self.n_support
        if ns:
            onehot = np.zeros((ns, k))
            onehot[np.arange(ns), self.support_labels] = 1.0
            if not np.array_equal(z[:ns], onehot):
                raise ValueError("support assignments must be one-hot labels")
            if not np.all(xi[:ns] == 1.0):
                raise ValueError("support inlierness must equal 1")
        if self.unit_centroids:
            norms = np.linalg.norm(mu, axis=1)
            if np.any(np.abs(norms - 1) > UNIT_TOL):
                raise ValueError("centroids must have unit norm")


@dataclass(frozen=True, eq=False)
class PredictionResult:
    class_posteriors: np.ndarray
    outlierness: np.ndarray
    hard_labels: np.ndarray = field(default=None)

    def __post_init__(self):
        post = np.asarray(self.class_posteriors, dtype=np.float64)
        object.__setattr__(self, "class_posteriors", post)
        object.__setattr__(
            self, "outlierness", np.asarray(self.outlierness, dtype=np.float64)
        )
        if self.hard_labels is None:
            # np.argmax returns the first maximum: ties go to the lowest index
            object.__setattr__(self, "hard_labels", np.argmax(post, axis=1))
        else:
            object.__setattr__(
                self, "hard_labels", np.asarray(self.hard_labels, dtype=np.int64)
            )


@dataclass(frozen=True)
class MetricsReport:
    acc: float
    auroc: float
    aupr: float
    prec_at_090: float

    def __post_init__(self):
        for name in ("acc", "auroc", "aupr", "prec_at_090"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")

    def as_dict(self) -> dict:
        return {
            "acc": self.acc, "auroc": self.auroc,
            "aupr": self.aupr, "prec_at_090": self.prec_at_090,
        }

