"""Line-oriented feature files.

One JSON object per line, UTF-8::

    {"id": "n01532829_1", "class": 3, "split": "test", "features": [0.12, -0.5, ...]}

``split`` is one of ``base``, ``validation``, ``test``. Blank lines are
skipped. Floats are written with ``repr`` precision, so a write/read cycle
reproduces every value bit for bit.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .types import SPLITS, DataError, Dataset, FeatureRecord, check_disjoint_splits, validate_dataset


def _parse_line(line: str, lineno: int):
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataError(f"line {lineno}: malformed JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise DataError(f"line {lineno}: expected an object")
    missing = [k for k in ("id", "class", "split", "features") if k not in obj]
    if missing:
        raise DataError(f"line {lineno}: missing fields {missing}")
    cls = obj["class"]
    if isinstance(cls, bool) or not isinstance(cls, int):
        raise DataError(f"line {lineno}: class must be an integer")
    if obj["split"] not in SPLITS:
        raise DataError(f"line {lineno}: unknown split {obj['split']!r}")
    feats = obj["features"]
    if not isinstance(feats, list) or not feats or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in feats
    ):
        raise DataError(f"line {lineno}: features must be a nonempty list of numbers")
    x = np.array(feats, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DataError(f"line {lineno}: non-finite feature value")
    return FeatureRecord(str(obj["id"]), cls, x), obj["split"]


def read_records(path):
    """Yield ``(record, split)`` pairs, checking dimension consistency as it goes."""
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec, split = _parse_line(line, lineno)
            if dim is None:
                dim = len(rec.features)
            elif len(rec.features) != dim:
                raise DataError(
                    f"line {lineno}: dimension {len(rec.features)} differs from {dim}"
                )
            yield rec, split


def load_splits(path) -> dict:
    """Read a feature file into one :class:`Dataset` per split present."""
    buckets = {}
    for rec, split in read_records(path):
        buckets.setdefault(split, []).append(rec)
    if not buckets:
        raise DataError(f"{path}: no records")
    datasets = {s: Dataset(tuple(recs), s) for s, recs in buckets.items()}
    problems = []
    for ds in datasets.values():
        problems.extend(validate_dataset(ds))
    problems.extend(check_disjoint_splits(datasets))
    if problems:
        raise DataError(f"{path}: " + "; ".join(problems[:5]))
    return datasets


def load_features(path, split=None) -> Dataset:
    """Load a feature file, optionally keeping a single split.

    Without ``split`` all records are returned in file order and the
    dataset's ``split`` attribute is ``None``.
    """
    records = [rec for rec, s in read_records(path) if split is None or s == split]
    if not records:
        where = f" in split {split!r}" if split else ""
        raise DataError(f"{path}: no records{where}")
    ds = Dataset(tuple(records), split)
    problems = validate_dataset(ds)
    if problems:
        raise DataError(f"{path}: " + "; ".join(problems[:5]))
    return ds


def _record_line(rec: FeatureRecord, split: str) -> str:
    feats = [float(v) for v in rec.features]
    if not all(math.isfinite(v) for v in feats):
        raise DataError(f"record {rec.id}: non-finite feature value")
    obj = {"id": rec.id, "class": int(rec.class_label), "split": split, "features": feats}
    return json.dumps(obj, separators=(",", ":"))


def write_features(path, datasets) -> None:
    """Write datasets (a single one or a ``{split: Dataset}`` mapping) to ``path``."""
    if isinstance(datasets, Dataset):
        datasets = {datasets.split or "test": datasets}
    with open(Path(path), "w", encoding="utf-8") as fh:
        for split in SPLITS:
            if split not in datasets:
                continue
            for rec in datasets[split].records:
                fh.write(_record_line(rec, split) + "\n")
