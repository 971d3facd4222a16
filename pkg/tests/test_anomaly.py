import numpy as np
import pytest
from datetime import date, timedelta

from numpy.testing import assert_allclose

from eventwindow import anomaly as am
from eventwindow.errors import InsufficientDataError, MethodOutputMismatchError, ZeroMADError

from conftest import make_series


def _random_walk_series(rng, n=101, level=16000.0, step=12.0):
    levels = level + np.cumsum(rng.normal(0.0, step, size=n))
    return make_series(levels)


def _planted_series(rng, n_inliers=100, mads=10.0, plant_at=60):
    series = _random_walk_series(rng, n=n_inliers + 1)
    values = series.values.copy()
    med = np.median(values)
    mad = np.median(np.abs(values - med))
    values[plant_at] = med + mads * mad
    return make_series(values), series.dates[plant_at]


def test_average_path_length_values():
    assert am.average_path_length(0) == 0.0
    assert am.average_path_length(1) == 0.0
    assert am.average_path_length(2) == 1.0  # 2*H(1) - 2*(1)/2
    # exact harmonic sum, not the asymptotic approximation
    assert_allclose(am.average_path_length(5), 2 * (1 + 1 / 2 + 1 / 3 + 1 / 4) - 8 / 5, rtol=1e-15)


def test_feature_matrix_shape(fixture_segments):
    feats = am.build_features(fixture_segments.post)
    assert feats.features.shape == (69, 2)
    assert len(feats.dates) == 69
    med = np.median(feats.features, axis=0)
    assert np.max(np.abs(med)) < 1.0  # roughly centered


def test_feature_matrix_zero_mad():
    with pytest.raises(ZeroMADError):
        am.build_features(make_series([100.0] * 20))


def test_isolation_forest_identical_rows():
    dates = tuple(date(2025, 1, 1) + timedelta(days=i) for i in range(10))
    feats = am.FeatureMatrix(
        dates=dates,
        features=np.zeros((10, 2)),
        levels=np.full(10, 5.0),
        returns=np.zeros(10),
        medians=np.zeros(2),
        mads=np.ones(2),
    )
    out = am.isolation_forest(feats, trees=50, seed=3)
    assert np.all(out.raw_scores == out.raw_scores[0])
    assert np.all(out.votes == 1)  # strict quantile rule flags nothing


def test_isolation_forest_planted_outlier_top_score():
    rng = np.random.default_rng(42)
    series, planted_date = _planted_series(rng)
    feats = am.build_features(series)
    out = am.isolation_forest(feats, seed=7)
    top = np.argmax(out.raw_scores)
    assert out.dates[top] == planted_date
    assert out.votes[top] == -1


def test_isolation_forest_bit_reproducible(fixture_segments):
    feats = am.build_features(fixture_segments.post)
    a = am.isolation_forest(feats, trees=100, seed=11)
    b = am.isolation_forest(feats, trees=100, seed=11)
    assert np.array_equal(a.raw_scores, b.raw_scores)
    assert np.array_equal(a.votes, b.votes)


def test_isolation_forest_needs_rows():
    feats = am.FeatureMatrix(
        dates=tuple(date(2025, 1, 1) + timedelta(days=i) for i in range(4)),
        features=np.random.default_rng(0).normal(size=(4, 2)),
        levels=np.ones(4),
        returns=np.zeros(4),
        medians=np.zeros(2),
        mads=np.ones(2),
    )
    with pytest.raises(InsufficientDataError):
        am.isolation_forest(feats)


def test_one_class_svm_nu_property():
    rng = np.random.default_rng(5)
    series = _random_walk_series(rng)
    feats = am.build_features(series)
    out = am.one_class_svm(feats, nu=0.05)
    frac = float(np.mean(out.votes == -1))
    n = len(out.votes)
    assert frac <= 0.05 + 2.0 / n + 1e-12


def test_one_class_svm_planted_outlier_most_negative():
    rng = np.random.default_rng(10)
    series, planted_date = _planted_series(rng)
    feats = am.build_features(series)
    out = am.one_class_svm(feats)
    decision = -out.raw_scores
    i = feats.dates.index(planted_date)
    assert decision[i] < 0.0
    others = np.delete(decision, i)
    assert decision[i] < np.min(others) + 1e-12


def test_one_class_svm_duplicate_rows_same_decision_sign():
    rng = np.random.default_rng(20)
    x = rng.normal(size=(30, 2))
    dates = tuple(date(2025, 1, 1) + timedelta(days=i) for i in range(60))
    feats = am.FeatureMatrix(
        dates=dates,
        features=np.vstack([x, x]),
        levels=np.ones(60),
        returns=np.zeros(60),
        medians=np.zeros(2),
        mads=np.ones(2),
    )
    out = am.one_class_svm(feats)
    decision = -out.raw_scores
    # identical rows produce identical decision values
    assert_allclose(decision[:30], decision[30:], atol=1e-9)


def test_one_class_svm_kkt(fixture_segments):
    feats = am.build_features(fixture_segments.post)
    x = feats.features
    gamma = 1.0 / (x.shape[1] * float(np.var(x)))
    gram = am.rbf_gram(x, gamma)
    n = x.shape[0]
    upper = 1.0 / (0.05 * n)
    alpha = am._solve_one_class_dual(gram, upper, 1e-6, 200_000)
    assert abs(alpha.sum() - 1.0) < 1e-9
    assert np.all(alpha >= -1e-12) and np.all(alpha <= upper + 1e-12)
    g = gram @ alpha
    can_up = alpha < upper - 1e-12
    can_down = alpha > 1e-12
    gap = float(np.max(-g[can_up]) - np.min(-g[can_down]))
    assert gap < 1e-6


def test_iqr_detector_hand_case():
    values = np.array([1, 2, 3, 4, 5, 6, 7, 8, 9, 100.0])
    out = am.iqr_detector(values)
    assert out.votes[-1] == -1
    assert np.all(out.votes[:-1] == 1)


def test_iqr_detector_constant():
    out = am.iqr_detector(np.full(10, 3.0))
    assert np.all(out.votes == 1)


def test_iqr_detector_symmetric_inliers():
    rng = np.random.default_rng(2)
    out = am.iqr_detector(rng.uniform(0.0, 1.0, size=50))
    # uniform has no points beyond 1.5 IQR
    assert np.all(out.votes == 1)


def test_ensemble_vote_flip_boundary():
    dates = tuple(date(2025, 2, 1) + timedelta(days=i) for i in range(8))
    scores = np.linspace(0.3, 0.8, 8)
    base_votes = np.array([1, 1, 1, 1, 1, -1, -1, 1])
    forest = am.MethodOutput(am.METHOD_ISOLATION_FOREST, dates, scores, base_votes.copy())
    svm_votes = np.array([1, 1, 1, 1, 1, -1, 1, 1])
    svm = am.MethodOutput(am.METHOD_ONE_CLASS_SVM, dates, scores[::-1].copy(), svm_votes)
    stat = am.MethodOutput(am.METHOD_STATISTICAL, dates, np.zeros(8), np.ones(8, dtype=int))

    verdicts = am.ensemble(forest, svm, stat)
    assert [v.is_anomaly for v in verdicts] == [False] * 5 + [True, False, False]
    # flipping one vote on the 2-of-3 boundary date flips the verdict
    svm_flipped = am.MethodOutput(am.METHOD_ONE_CLASS_SVM, dates, svm.raw_scores,
                                  np.array([1, 1, 1, 1, 1, -1, -1, 1]))
    verdicts2 = am.ensemble(forest, svm_flipped, stat)
    assert verdicts2[6].is_anomaly and not verdicts[6].is_anomaly


def test_ensemble_score_range(fixture_segments):
    verdicts = am.detect_segment(fixture_segments.post, seed=2)
    scores = np.array([v.ensemble_score for v in verdicts])
    assert np.all(scores >= 0.0) and np.all(scores <= 1.0)
    assert scores.max() == 1.0


def test_ensemble_date_mismatch():
    dates = tuple(date(2025, 2, 1) + timedelta(days=i) for i in range(5))
    other = tuple(date(2025, 3, 1) + timedelta(days=i) for i in range(5))
    mk = lambda name, ds: am.MethodOutput(name, ds, np.zeros(5), np.ones(5, dtype=int))
    with pytest.raises(MethodOutputMismatchError):
        am.ensemble(mk(am.METHOD_ISOLATION_FOREST, dates),
                    mk(am.METHOD_ONE_CLASS_SVM, other),
                    mk(am.METHOD_STATISTICAL, dates))
    with pytest.raises(MethodOutputMismatchError):
        am.ensemble(mk(am.METHOD_ISOLATION_FOREST, dates),
                    mk(am.METHOD_ONE_CLASS_SVM, dates),
                    mk(am.METHOD_STATISTICAL, other))


def test_ensemble_weights_validated():
    dates = tuple(date(2025, 2, 1) + timedelta(days=i) for i in range(5))
    mk = lambda name: am.MethodOutput(name, dates, np.zeros(5), np.ones(5, dtype=int))
    with pytest.raises(ValueError):
        am.ensemble(mk(am.METHOD_ISOLATION_FOREST), mk(am.METHOD_ONE_CLASS_SVM),
                    mk(am.METHOD_STATISTICAL), weights=(0.5, 0.5, 0.5))


def test_all_methods_positive_votes_no_anomaly():
    dates = tuple(date(2025, 2, 1) + timedelta(days=i) for i in range(6))
    rng = np.random.default_rng(1)
    mk = lambda name: am.MethodOutput(name, dates, rng.uniform(size=6), np.ones(6, dtype=int))
    verdicts = am.ensemble(mk(am.METHOD_ISOLATION_FOREST), mk(am.METHOD_ONE_CLASS_SVM),
                           mk(am.METHOD_STATISTICAL))
    assert not any(v.is_anomaly for v in verdicts)
