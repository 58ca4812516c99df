"""Episodic benchmark runner.

Each task index gets its own episode (see :mod:`oslo.episodes` for the RNG
stream rule), every requested method runs on it with its own centering, and
one :class:`ResultRow` per (task, method) is appended to a CSV file as soon as
the task finishes. Rows are always written in task-index order, whatever the
worker count.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import baselines, solver
from .episodes import audit_episode, sample_episode
from .io import load_splits
from .metrics import METRIC_NAMES, ScoredQuerySet, aggregate, evaluate
from .preprocess import CenteringMode, compute_base_center, normalize_episode
from .types import DataError, Dataset, EpisodeSpec, MetricsReport, SolverConfig

log = logging.getLogger(__name__)

TRANSDUCTIVE = ("oslo", "oslo_no_xi", "oslo_init")
INDUCTIVE = ("simpleshot_maxprob", "knn", "strong_baseline")
METHODS = TRANSDUCTIVE + INDUCTIVE


class BenchmarkError(RuntimeError):
    """A task failed; the message names the task index and method."""


@dataclass(frozen=True)
class BenchConfig:
    features_path: Optional[str] = None
    split: str = "test"
    episode: EpisodeSpec = EpisodeSpec()
    methods: tuple = ("oslo", "strong_baseline")
    solver: SolverConfig = SolverConfig()
    knn: baselines.KnnConfig = baselines.KnnConfig()
    n_tasks: int = 1000
    #: method -> "base" | "task"; unlisted methods use their default centering
    centering: dict = field(default_factory=dict)
    output_path: Optional[str] = None
    seed: int = 0
    workers: int = 1
    record_time: bool = True
    audit: bool = True

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.methods:
            raise ValueError("at least one method is required")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {METHODS}")
        if self.n_tasks < 1:
            raise ValueError("n_tasks must be >= 1")
        for m, mode in self.centering.items():
            if mode not in ("base", "task"):
                raise ValueError(f"centering for {m} must be 'base' or 'task'")

    def centering_for(self, method: str) -> str:
        default = "task" if method in TRANSDUCTIVE else "base"
        return self.centering.get(method, default)


@dataclass(frozen=True)
class ResultRow:
    task_index: int
    method: str
    acc: float
    auroc: float
    aupr: float
    prec_at_090: float
    wall_time_ms: float

    def report(self) -> MetricsReport:
        return MetricsReport(self.acc, self.auroc, self.aupr, self.prec_at_090)

    def csv_fields(self) -> list:
        return [
            str(self.task_index), self.method,
            repr(self.acc), repr(self.auroc), repr(self.aupr), repr(self.prec_at_090),
            f"{self.wall_time_ms:.3f}",
        ]


ROW_HEADER = [f.name for f in fields(ResultRow)]


def predict(method: str, episode, config: BenchConfig):
    """Run one method on an already centered episode."""
    if method == "oslo":
        return solver.solve(episode, config.solver)[0]
    if method == "oslo_no_xi":
        return solver.solve(episode, replace(config.solver, fix_xi_to_one=True))[0]
    if method == "oslo_init":
        return solver.solve(episode, replace(config.solver, max_iters=0))[0]
    if method == "simpleshot_maxprob":
        return baselines.simpleshot_maxprob(episode)
    if method == "knn":
        return baselines.knn_classify(episode, config.knn)
    if method == "strong_baseline":
        return baselines.strong_baseline(episode, config.knn)
    raise ValueError(f"unknown method {method!r}")


def episode_spec(config: BenchConfig) -> EpisodeSpec:
    return replace(config.episode, rng_seed=config.seed)


def run_task(dataset: Dataset, base_center, config: BenchConfig, task_index: int,
             labels_by_id=None) -> list:
    """Sample task ``task_index`` and score every configured method on it."""
    spec = episode_spec(config)
    try:
        episode = sample_episode(dataset, spec, task_index)
    except Exception as exc:
        raise BenchmarkError(f"task {task_index}: sampling failed: {exc}") from exc
    if config.audit:
        problems = audit_episode(episode, spec, labels_by_id)
        if problems:
            raise BenchmarkError(f"task {task_index}: audit failed: {problems[:3]}")
    centered = {
        "task": lambda: normalize_episode(episode, CenteringMode("task")),
        "base": lambda: normalize_episode(episode, CenteringMode("base", base_center)),
    }
    cache = {}
    rows = []
    for method in config.methods:
        mode = config.centering_for(method)
        try:
            if mode not in cache:
                cache[mode] = centered[mode]()
            start = time.perf_counter()
            result = predict(method, cache[mode], config)
            elapsed = (time.perf_counter() - start) * 1e3
            scored = ScoredQuerySet.from_prediction(result, episode.ground_truth_labels)
            report = evaluate(scored)
        except Exception as exc:
            raise BenchmarkError(f"task {task_index}, method {method}: {exc}") from exc
        rows.append(ResultRow(
            task_index, method, report.acc, report.auroc, report.aupr,
            report.prec_at_090, elapsed if config.record_time else 0.0,
        ))
    return rows


def resolve_base_center(splits: dict, dim: int) -> np.ndarray:
    """Mean of the base split; the origin when the file carries no base split."""
    if "base" in splits:
        return compute_base_center(splits["base"])
    log.warning("no base split in feature file; base centering uses the origin")
    return np.zeros(dim)


# state shared with pool workers, installed once per process
_WORKER = {}


def _init_worker(dataset, base_center, config, labels_by_id):
    _WORKER.update(dataset=dataset, base_center=base_center, config=config,
                   labels_by_id=labels_by_id)


def _worker_task(task_index):
    w = _WORKER
    return run_task(w["dataset"], w["base_center"], w["config"], task_index,
                    w["labels_by_id"])


def iter_results(dataset: Dataset, base_center, config: BenchConfig):
    """Yield per-task row lists in task-index order."""
    labels_by_id = dict(zip(dataset.ids, dataset.labels.tolist())) if config.audit else None
    indices = range(config.n_tasks)
    if config.workers <= 1:
        for i in indices:
            yield run_task(dataset, base_center, config, i, labels_by_id)
        return
    with ProcessPoolExecutor(
        max_workers=config.workers, initializer=_init_worker,
        initargs=(dataset, base_center, config, labels_by_id),
    ) as pool:
        # map() preserves submission order
        yield from pool.map(_worker_task, indices, chunksize=4)


def summarize(rows, methods) -> dict:
    summary = {}
    for m in methods:
        reports = [r.report() for r in rows if r.method == m]
        if len(reports) >= 2:
            summary[m] = aggregate(reports)
        else:
            summary[m] = {
                name: {"mean": getattr(reports[0], name), "std": None, "ci95": None, "n": 1}
                for name in METRIC_NAMES
            }
    return summary


def summary_path(output_path) -> Path:
    p = Path(output_path)
    return p.with_name(p.stem + ".summary.json")


def run_benchmark(config: BenchConfig, splits: Optional[dict] = None):
    """Run all tasks; returns ``(rows, summary)``.

    ``splits`` (``{split: Dataset}``) bypasses reading ``config.features_path``.
    When ``config.output_path`` is set, rows are flushed to CSV after every
    task and the summary lands next to it as ``<stem>.summary.json``.
    """
    if splits is None:
        if config.features_path is None:
            raise ValueError("features_path or splits is required")
        splits = load_splits(config.features_path)
    if config.split not in splits:
        raise DataError(f"feature file has no {config.split!r} split")
    dataset = splits[config.split]
    base_center = resolve_base_center(splits, dataset.dim)

    rows = []
    fh = writer = None
    if config.output_path:
        fh = open(config.output_path, "w", newline="", encoding="utf-8")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ROW_HEADER)
        fh.flush()
    try:
        for task_rows in iter_results(dataset, base_center, config):
            rows.extend(task_rows)
            if writer is not None:
                writer.writerows(r.csv_fields() for r in task_rows)
                fh.flush()
    finally:
        if fh is not None:
            fh.close()

    summary = summarize(rows, config.methods)
    if config.output_path:
        meta = {
            "n_tasks": config.n_tasks,
            "episode": asdict(episode_spec(config)),
            "solver": asdict(config.solver),
            "methods": list(config.methods),
            "metrics": summary,
        }
        with open(summary_path(config.output_path), "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return rows, summary


def read_results(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [
            ResultRow(int(r["task_index"]), r["method"], float(r["acc"]),
                      float(r["auroc"]), float(r["aupr"]), float(r["prec_at_090"]),
                      float(r["wall_time_ms"]))
            for r in reader
        ]
