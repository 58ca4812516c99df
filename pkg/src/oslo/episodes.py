"""Episode sampling and synthetic feature datasets.

Randomness
----------
Every episode draws from its own numpy ``Generator(PCG64)`` seeded by
``SeedSequence([rng_seed, task_index])``. PCG64 and SeedSequence are fully
specified, so any implementation following the same draw order reproduces
the same episodes. Draw order for a standard episode:

1. ``permutation`` of the sorted distinct class labels; the first
   ``n_ways`` are closed-set, the next ``n_open_classes`` open-set.
2. For each chosen class in that order, ``choice`` without replacement of
   ``n_shots + n_query_per_class`` (closed) or ``n_query_per_class`` (open)
   positions among the class's records (in file order). Closed classes take
   the first ``n_shots`` picks as support.

Broad episodes replace step 2 for open classes with a single ``choice`` of
``n_ways * n_query_per_class`` records from the pooled remaining classes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import OUTLIER, Dataset, DataError, Episode, EpisodeSpec


@dataclass(frozen=True)
class SyntheticSpec:
    num_classes: int = 20
    dim: int = 64
    separation: float = 3.0
    samples_per_class: int = 100
    rng_seed: int = 0

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        if self.separation < 0:
            raise ValueError("separation must be nonnegative")
        if self.dim < 1 or self.samples_per_class < 1:
            raise ValueError("dim and samples_per_class must be positive")


def episode_rng(seed: int, task_index: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, task_index])))


def _pick_classes(dataset, n, rng):
    classes = dataset.classes
    if len(classes) < n:
        raise DataError(f"need {n} classes, dataset has {len(classes)}")
    return [int(c) for c in rng.permutation(classes)[:n]]


def _closed_part(dataset, spec, closed, rng, by_class):
    support, queries, query_gt = [], [], []
    support_labels = []
    need = spec.n_shots + spec.n_query_per_class
    for k, c in enumerate(closed):
        rows = by_class[c]
        if len(rows) < need:
            raise DataError(f"class {c} has {len(rows)} records, need {need}")
        picked = rows[rng.choice(len(rows), size=need, replace=False)]
        support.extend(picked[: spec.n_shots])
        support_labels.extend([k] * spec.n_shots)
        queries.extend(picked[spec.n_shots:])
        query_gt.extend([k] * spec.n_query_per_class)
    return support, support_labels, queries, query_gt


def _assemble(dataset, spec, support, support_labels, queries, query_gt, closed, open_):
    x = dataset.features
    ids = dataset.ids
    return Episode(
        x[support], np.array(support_labels), x[queries], np.array(query_gt),
        spec.n_ways,
        support_ids=tuple(ids[i] for i in support),
        query_ids=tuple(ids[i] for i in queries),
        closed_classes=tuple(closed),
        open_classes=tuple(open_),
    )


def sample_episode(dataset: Dataset, spec: EpisodeSpec, task_index: int = 0) -> Episode:
    """Standard protocol: fixed closed and open class sets, equal queries per class."""
    if spec.mode == "broad":
        return sample_episode_broad(dataset, spec, task_index)
    rng = episode_rng(spec.rng_seed, task_index)
    chosen = _pick_classes(dataset, spec.n_ways + spec.n_open_classes, rng)
    closed, open_ = chosen[: spec.n_ways], chosen[spec.n_ways:]
    by_class = dataset.class_indices()
    support, ys, queries, gt = _closed_part(dataset, spec, closed, rng, by_class)
    for c in open_:
        rows = by_class[c]
        if len(rows) < spec.n_query_per_class:
            raise DataError(
                f"class {c} has {len(rows)} records, need {spec.n_query_per_class}"
            )
        picked = rows[rng.choice(len(rows), size=spec.n_query_per_class, replace=False)]
        queries.extend(picked)
        gt.extend([OUTLIER] * spec.n_query_per_class)
    return _assemble(dataset, spec, support, ys, queries, gt, closed, open_)


def sample_episode_broad(dataset: Dataset, spec: EpisodeSpec, task_index: int = 0) -> Episode:
    """Broad protocol: outliers drawn uniformly from all non-closed-set records."""
    rng = episode_rng(spec.rng_seed, task_index)
    if len(dataset.classes) < spec.n_ways + 1:
        raise DataError("broad episodes need at least n_ways + 1 classes")
    closed = _pick_classes(dataset, spec.n_ways, rng)
    by_class = dataset.class_indices()
    support, ys, queries, gt = _closed_part(dataset, spec, closed, rng, by_class)
    open_classes = [int(c) for c in dataset.classes if int(c) not in set(closed)]
    pool = np.sort(np.concatenate([by_class[c] for c in open_classes]))
    n_out = spec.n_ways * spec.n_query_per_class
    if len(pool) < n_out:
        raise DataError(f"only {len(pool)} open-set records, need {n_out}")
    picked = pool[rng.choice(len(pool), size=n_out, replace=False)]
    queries.extend(picked)
    gt.extend([OUTLIER] * n_out)
    labels = dataset.labels
    used_open = sorted({int(labels[i]) for i in picked})
    return _assemble(dataset, spec, support, ys, queries, gt, closed, used_open)


def generate_synthetic_dataset(spec: SyntheticSpec, split=None) -> Dataset:
    """Noisy unit-sphere clusters around random class directions.

    Each class gets a direction drawn from a normalized standard Gaussian.
    Samples are ``normalize(direction + noise / separation)`` with
    ``noise ~ N(0, I / dim)`` so the noise norm is about one in any dimension.
    ``separation == 0`` yields pure noise whose label carries no geometry.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([spec.rng_seed])))
    d = spec.dim
    directions = rng.standard_normal((spec.num_classes, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    n = spec.samples_per_class
    noise = rng.standard_normal((spec.num_classes, n, d)) / np.sqrt(d)
    if spec.separation > 0:
        points = directions[:, None, :] + noise / spec.separation
    else:
        points = noise
    points /= np.linalg.norm(points, axis=2, keepdims=True)
    labels = np.repeat(np.arange(spec.num_classes), n)
    ids = [f"c{c}_{i}" for c in range(spec.num_classes) for i in range(n)]
    return Dataset.from_arrays(points.reshape(-1, d), labels, ids, split)


def audit_episode(episode: Episode, spec: EpisodeSpec, labels_by_id: dict = None) -> list:
    """Check an episode's composition against the sampling protocol.

    Returns a list of violations; empty means the episode is conformant.
    With ``labels_by_id`` (record id -> class) given, every support and query
    record is traced back to its true class.
    """
    problems = []
    k = spec.n_ways
    counts = np.bincount(episode.support_labels, minlength=k)
    if episode.n_ways != k or np.any(counts != spec.n_shots):
        problems.append(f"support counts {counts.tolist()} != {spec.n_shots} per class")
    n_in = int(np.sum(~episode.is_outlier))
    n_out = int(np.sum(episode.is_outlier))
    q = spec.n_query_per_class
    want_out = k * q if spec.mode == "broad" else spec.n_open_classes * q
    if n_in != k * q or n_out != want_out:
        problems.append(f"{n_in} inliers / {n_out} outliers, want {k * q} / {want_out}")
    inlier_counts = np.bincount(
        episode.ground_truth_labels[~episode.is_outlier], minlength=k
    )
    if np.any(inlier_counts != q):
        problems.append(f"inlier counts per class {inlier_counts.tolist()} != {q}")
    if set(episode.closed_classes) & set(episode.open_classes):
        problems.append("closed and open class sets overlap")
    if spec.mode == "standard" and len(set(episode.open_classes)) != spec.n_open_classes:
        problems.append(f"{len(set(episode.open_classes))} open classes")
    if set(episode.support_ids) & set(episode.query_ids):
        problems.append("a record appears in both support and query")
    if len(set(episode.query_ids)) != len(episode.query_ids):
        problems.append("duplicate query records")
    if labels_by_id is not None:
        label_of = labels_by_id
        closed = list(episode.closed_classes)
        for rid, y in zip(episode.support_ids, episode.support_labels):
            if label_of[rid] != closed[y]:
                problems.append(f"support record {rid} mislabeled")
        for rid, y in zip(episode.query_ids, episode.ground_truth_labels):
            true = label_of[rid]
            if y == OUTLIER:
                if true in closed:
                    problems.append(f"outlier {rid} belongs to a closed class")
                if spec.mode == "standard" and true not in episode.open_classes:
                    problems.append(f"outlier {rid} outside the open class set")
            elif true != closed[y]:
                problems.append(f"query record {rid} mislabeled")
    return problems
