import numpy as np
import pytest

from oslo.episodes import (
    SyntheticSpec, audit_episode, generate_synthetic_dataset, sample_episode,
    sample_episode_broad,
)
from oslo.types import OUTLIER, DataError, EpisodeSpec


@pytest.fixture(scope="module")
def ds():
    return generate_synthetic_dataset(SyntheticSpec(20, 8, 2.0, 25, 0))


def labels_by_id(ds):
    return dict(zip(ds.ids, ds.labels.tolist()))


def test_standard_protocol_arithmetic(ds):
    spec = EpisodeSpec(5, 1, 15, 5, rng_seed=4)
    ep = sample_episode(ds, spec)
    assert ep.n_support == 5 and ep.n_query == 150
    assert int(np.sum(~ep.is_outlier)) == 75 and int(np.sum(ep.is_outlier)) == 75
    assert audit_episode(ep, spec, labels_by_id(ds)) == []


def test_same_seed_same_episode(ds):
    spec = EpisodeSpec(n_shots=5, rng_seed=11)
    a, b = sample_episode(ds, spec, 3), sample_episode(ds, spec, 3)
    assert a.support_ids == b.support_ids and a.query_ids == b.query_ids
    assert a.query_features.tobytes() == b.query_features.tobytes()
    c = sample_episode(ds, spec, 4)
    assert c.query_ids != a.query_ids


def test_composition_over_many_tasks(ds):
    table = labels_by_id(ds)
    for shots, q, n_open in ((1, 15, 5), (5, 10, 3), (2, 1, 1)):
        spec = EpisodeSpec(5, shots, q, n_open, rng_seed=1)
        for i in range(50):
            ep = sample_episode(ds, spec, i)
            assert not set(ep.closed_classes) & set(ep.open_classes)
            assert not set(ep.support_ids) & set(ep.query_ids)
            assert np.mean(~ep.is_outlier) == 5 / (5 + n_open)
            assert audit_episode(ep, spec, table) == []


def test_insufficient_data(ds):
    with pytest.raises(DataError):
        sample_episode(ds, EpisodeSpec(n_ways=15, n_open_classes=6))
    with pytest.raises(DataError):
        sample_episode(ds, EpisodeSpec(n_query_per_class=30))


def test_broad_protocol(ds):
    spec = EpisodeSpec(5, 1, 15, 0, mode="broad", rng_seed=2)
    table = labels_by_id(ds)
    spans = []
    for i in range(20):
        ep = sample_episode_broad(ds, spec, i)
        assert int(np.sum(~ep.is_outlier)) == 75 and int(np.sum(ep.is_outlier)) == 75
        out_classes = {table[r] for r, y in zip(ep.query_ids, ep.ground_truth_labels) if y == OUTLIER}
        assert not out_classes & set(ep.closed_classes)
        spans.append(len(out_classes))
        assert audit_episode(ep, spec, table) == []
    assert max(spans) > 5  # spread across many remaining classes
    a, b = sample_episode_broad(ds, spec, 7), sample_episode_broad(ds, spec, 7)
    assert a.query_ids == b.query_ids


def test_broad_with_six_classes():
    ds6 = generate_synthetic_dataset(SyntheticSpec(6, 4, 1.0, 80, 3))
    ep = sample_episode(ds6, EpisodeSpec(5, 1, 15, 0, mode="broad"))
    assert len(ep.open_classes) == 1
    table = labels_by_id(ds6)
    outs = {table[r] for r, y in zip(ep.query_ids, ep.ground_truth_labels) if y == OUTLIER}
    assert outs == set(ep.open_classes)


def test_auditor_catches_tampering(ds):
    spec = EpisodeSpec(rng_seed=9)
    ep = sample_episode(ds, spec)
    gt = ep.ground_truth_labels.copy()
    gt[0] = OUTLIER
    bad = type(ep)(ep.support_features, ep.support_labels, ep.query_features, gt, 5,
                   ep.support_ids, ep.query_ids, ep.closed_classes, ep.open_classes)
    assert audit_episode(bad, spec, labels_by_id(ds))


class TestSynthetic:
    def test_large_separation_collapses_classes(self):
        ds = generate_synthetic_dataset(SyntheticSpec(4, 16, 1e8, 10, 0))
        for c, rows in ds.class_indices().items():
            x = ds.features[rows]
            assert np.max(np.linalg.norm(x - x[0], axis=1)) < 1e-6

    def test_zero_separation_is_uninformative(self):
        from oslo.metrics import ScoredQuerySet, auroc
        from oslo.baselines import knn_outlier_score
        ds = generate_synthetic_dataset(SyntheticSpec(20, 16, 0.0, 40, 1))
        vals = []
        for i in range(200):
            ep = sample_episode(ds, EpisodeSpec(n_shots=5, rng_seed=0), i)
            vals.append(auroc(ScoredQuerySet.from_scores(knn_outlier_score(ep), ep.is_outlier)))
        se = np.std(vals, ddof=1) / np.sqrt(len(vals))
        assert abs(np.mean(vals) - 0.5) < 3 * se

    def test_mid_separation_mif(self):
        from oslo.diagnostics import mean_imposture_factor
        mif = mean_imposture_factor(generate_synthetic_dataset(SyntheticSpec(10, 16, 0.7, 50, 5)))
        assert 0.0 < mif < 0.5

    def test_deterministic_and_unit_norm(self):
        spec = SyntheticSpec(5, 8, 1.5, 7, 42)
        a, b = generate_synthetic_dataset(spec), generate_synthetic_dataset(spec)
        assert a.features.tobytes() == b.features.tobytes()
        np.testing.assert_allclose(np.linalg.norm(a.features, axis=1), 1.0, atol=1e-12)

    def test_spec_guards(self):
        with pytest.raises(ValueError):
            SyntheticSpec(num_classes=1)
        with pytest.raises(ValueError):
            SyntheticSpec(separation=-1)
