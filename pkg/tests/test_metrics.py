import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oslo.metrics import (
    ScoredQuerySet, accuracy, aggregate, aupr, auroc, evaluate, precision_at_recall,
)
from oslo.types import OUTLIER, MetricsReport

from oracles import (
    aupr_enumerate, auroc_pairs, expected_random_ap, prec_at_recall_enumerate, random_score_set,
)


def S(inliers, outliers):
    scores = list(inliers) + list(outliers)
    flags = [False] * len(inliers) + [True] * len(outliers)
    return ScoredQuerySet.from_scores(scores, flags)


class TestAccuracy:
    def test_outliers_excluded(self):
        s = ScoredQuerySet(np.zeros(4), [0, 0, 1, 1], [0, 1, 3, 2], [0, 1, OUTLIER, OUTLIER])
        assert accuracy(s) == 1.0

    def test_half_correct(self):
        s = ScoredQuerySet(np.zeros(5), [0, 0, 0, 0, 1], [0, 1, 0, 0, 0], [0, 1, 1, 1, OUTLIER])
        assert accuracy(s) == 0.5

    def test_random_labels_near_chance(self, rng):
        n = 100_000
        gt = rng.integers(0, 5, n)
        s = ScoredQuerySet(np.zeros(n), np.zeros(n, bool), rng.integers(0, 5, n), gt)
        se = np.sqrt(0.2 * 0.8 / n)
        assert abs(accuracy(s) - 0.2) < 4 * se

    def test_needs_inliers(self):
        with pytest.raises(ValueError):
            accuracy(ScoredQuerySet([0.1], [True], [0], [OUTLIER]))


class TestAuroc:
    def test_perfect(self):
        assert auroc(S([0.1, 0.2], [0.8, 0.9])) == 1.0

    def test_all_ties(self):
        assert auroc(S([0.3] * 5, [0.3] * 7)) == 0.5

    def test_mixed(self):
        assert auroc(S([0.2, 0.6], [0.4, 0.8])) == 0.75

    def test_degenerate(self):
        with pytest.raises(ValueError):
            auroc(S([0.1, 0.2], []))

    def test_matches_pair_counting(self, rng):
        for _ in range(200):
            scores, flags = random_score_set(rng, 60)
            assert auroc(ScoredQuerySet.from_scores(scores, flags)) == auroc_pairs(scores, flags)


class TestAupr:
    def test_perfect(self):
        assert aupr(S([0.1, 0.2, 0.3], [0.8, 0.9])) == 1.0

    def test_constant_is_outlier_fraction(self):
        assert aupr(S([0.5] * 75, [0.5] * 75)) == 0.5
        assert aupr(S([0.5] * 6, [0.5] * 2)) == 0.25

    def test_four_points(self):
        # descending: o(.9) i(.7) o(.4) i(.1) -> 1/2*1 + 1/2*2/3
        s = S([0.7, 0.1], [0.9, 0.4])
        assert aupr(s) == aupr_enumerate([0.7, 0.1, 0.9, 0.4], [0, 0, 1, 1])
        assert abs(aupr(s) - (0.5 + 1 / 3)) < 1e-15

    def test_matches_enumeration(self, rng):
        for _ in range(200):
            scores, flags = random_score_set(rng, 60)
            assert aupr(ScoredQuerySet.from_scores(scores, flags)) == aupr_enumerate(scores, flags)


class TestPrecisionAtRecall:
    def test_perfect(self):
        assert precision_at_recall(S([0.1, 0.2], [0.8, 0.9])) == 1.0

    def test_constant(self):
        assert precision_at_recall(S([0.4] * 3, [0.4])) == 0.25

    def test_example(self):
        assert precision_at_recall(S([0.85, 0.1], [0.9, 0.8]), 0.9) == 2 / 3

    def test_matches_enumeration(self, rng):
        for _ in range(200):
            scores, flags = random_score_set(rng, 60)
            s = ScoredQuerySet.from_scores(scores, flags)
            for t in (0.5, 0.9, 1.0):
                assert precision_at_recall(s, t) == prec_at_recall_enumerate(scores, flags, t)

    def test_bad_target(self):
        with pytest.raises(ValueError):
            precision_at_recall(S([0.1], [0.2]), 0.0)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_auroc_invariant_under_increasing_maps(seed):
    rng = np.random.default_rng(seed)
    scores, flags = random_score_set(rng, 80)
    base = auroc(ScoredQuerySet.from_scores(scores, flags))
    a, b = rng.uniform(0.1, 5), rng.uniform(-3, 3)
    for f in (lambda x: a * x + b, np.exp, lambda x: np.arctan(x) + x ** 3):
        assert auroc(ScoredQuerySet.from_scores(f(scores), flags)) == base


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_auroc_reflection_and_class_swap(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 100))
    flags = np.zeros(n, bool)
    flags[: int(rng.integers(1, n))] = True
    scores = rng.permutation(n).astype(float)  # tie-free
    fwd = auroc(ScoredQuerySet.from_scores(scores, flags))
    assert fwd + auroc(ScoredQuerySet.from_scores(-scores, flags)) == pytest.approx(1.0, abs=1e-12)
    assert auroc(ScoredQuerySet.from_scores(-scores, ~flags)) == fwd


def test_random_detector_concentrates_on_outlier_fraction():
    rng = np.random.default_rng(0)
    flags = np.r_[np.zeros(100, bool), np.ones(50, bool)]
    ap, pr = [], []
    for _ in range(2000):
        s = ScoredQuerySet.from_scores(rng.random(150), flags)
        ap.append(aupr(s))
        pr.append(precision_at_recall(s))
    frac = 50 / 150
    for values in (ap, pr):
        assert abs(np.mean(values) - frac) < 3 * np.std(values, ddof=1)
    # the small upward bias of AP is real and matches its closed form
    se = np.std(ap, ddof=1) / np.sqrt(len(ap))
    assert abs(np.mean(ap) - expected_random_ap(50, 150)) < 3 * se
    assert expected_random_ap(500, 1500) - frac < expected_random_ap(50, 150) - frac


class TestAggregate:
    def test_identical(self):
        r = MetricsReport(0.5, 0.6, 0.7, 0.8)
        out = aggregate([r] * 5)
        assert out["acc"]["ci95"] == 0.0 and out["aupr"]["mean"] == 0.7

    def test_two_reports(self):
        out = aggregate([MetricsReport(0, 0, 0, 0), MetricsReport(1, 1, 1, 1)])
        assert out["auroc"]["mean"] == 0.5

    def test_streaming_oracle(self, rng):
        vals = rng.random((1000, 4))
        out = aggregate([MetricsReport(*v) for v in vals])
        for j, name in enumerate(("acc", "auroc", "aupr", "prec_at_090")):
            mean = m2 = 0.0  # Welford
            for i, x in enumerate(vals[:, j], start=1):
                d = x - mean
                mean += d / i
                m2 += d * (x - mean)
            half = 1.96 * np.sqrt(m2 / 999) / np.sqrt(1000)
            assert abs(out[name]["mean"] - mean) < 1e-10
            assert abs(out[name]["ci95"] - half) < 1e-10

    def test_needs_two(self):
        with pytest.raises(ValueError):
            aggregate([MetricsReport(1, 1, 1, 1)])


def test_evaluate_report():
    s = ScoredQuerySet([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1], [0, 1, 0, 0], [0, 0, OUTLIER, OUTLIER])
    r = evaluate(s)
    assert (r.acc, r.auroc, r.aupr, r.prec_at_090) == (0.5, 1.0, 1.0, 1.0)
