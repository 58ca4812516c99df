import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from oslo.preprocess import (
    CenteringMode, center_normalize, compute_base_center, compute_task_center,
    normalize_episode,
)
from oslo.types import Dataset, DataError, DegenerateVectorError, Episode

from conftest import make_episode


def test_base_center_two_points():
    ds = Dataset.from_arrays([[1.0, 0.0], [0.0, 1.0]], [0, 1])
    np.testing.assert_array_equal(compute_base_center(ds), [0.5, 0.5])


def test_base_center_single_point():
    v = np.array([0.3, -2.0, 5.0])
    np.testing.assert_array_equal(compute_base_center(Dataset.from_arrays([v], [0])), v)


def test_base_center_matches_naive_sum(rng):
    x = rng.standard_normal((100, 7))
    ds = Dataset.from_arrays(x, np.arange(100) % 4)
    naive = [sum(float(row[j]) for row in x) / 100 for j in range(7)]
    np.testing.assert_allclose(compute_base_center(ds), naive, rtol=0, atol=1e-12)


def test_base_center_empty():
    with pytest.raises(DataError):
        compute_base_center(Dataset(()))


def test_task_center_examples(rng):
    ep = Episode([[1.0, 0.0]], [0], [[0.0, 1.0]], [-1], 2)
    np.testing.assert_array_equal(compute_task_center(ep), [0.5, 0.5])
    v = np.array([0.2, 0.4, -1.0])
    ep = Episode(np.tile(v, (2, 1)), [0, 1], np.tile(v, (3, 1)), [0, 1, -1], 2)
    np.testing.assert_allclose(compute_task_center(ep), v, atol=1e-15)
    ep = make_episode(rng)
    rows = list(ep.support_features) + list(ep.query_features)
    naive = [sum(float(r[j]) for r in rows) / len(rows) for j in range(ep.support_features.shape[1])]
    np.testing.assert_allclose(compute_task_center(ep), naive, rtol=0, atol=1e-12)


def test_task_center_ignores_outside_records(rng):
    ep = make_episode(rng)
    before = compute_task_center(ep)
    # same episode: the center depends on nothing but the episode's own rows
    assert np.array_equal(before, compute_task_center(ep.with_features(ep.support_features, ep.query_features)))


def test_base_center_uses_only_base_records(rng):
    base = Dataset.from_arrays(rng.standard_normal((20, 3)), np.arange(20) % 2, split="base")
    held_out = Dataset.from_arrays(rng.standard_normal((20, 3)) + 100, np.arange(20) % 2, split="test")
    c = compute_base_center(base)
    assert np.array_equal(c, compute_base_center(base))
    assert np.all(np.abs(c) < 5) and np.all(compute_base_center(held_out) > 90)


def test_center_normalize_345():
    np.testing.assert_allclose(center_normalize([3.0, 4.0], [0.0, 0.0]), [0.6, 0.8], atol=1e-15)


def test_center_normalize_degenerate():
    with pytest.raises(DegenerateVectorError):
        center_normalize([1.0, 2.0], [1.0, 2.0])


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=300, deadline=None)
@given(x=arrays(np.float64, 6, elements=finite), c=arrays(np.float64, 6, elements=finite))
def test_center_normalize_unit_norm_and_idempotent(x, c):
    if np.linalg.norm(x - c) <= 1e-6:
        return
    y = center_normalize(x, c)
    assert abs(np.linalg.norm(y) - 1.0) <= 1e-12
    np.testing.assert_allclose(center_normalize(y, np.zeros(6)), y, atol=1e-12)


def test_normalize_episode_rows_unit(rng):
    ep = make_episode(rng)
    for mode in (CenteringMode("task"), CenteringMode("base", np.full(8, 0.1))):
        out = normalize_episode(ep, mode)
        norms = np.linalg.norm(out.all_features, axis=1)
        np.testing.assert_allclose(norms, 1.0, atol=1e-12)


def test_centering_mode_requires_center():
    with pytest.raises(ValueError):
        CenteringMode("base")
