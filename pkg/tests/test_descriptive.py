import itertools
import math
import numpy as np
import pytest

from numpy.testing import assert_allclose

from eventwindow.descriptive import (
    excess_kurtosis,
    kde,
    l_moments,
    probability_weighted_moments,
    silverman_bandwidth,
    skewness,
    summarize,
    trimmed_mean,
)
from eventwindow.errors import (
    InsufficientDataError,
    ZeroBandwidthError,
    ZeroL2Error,
)


def test_summarize_symmetric_sample():
    s = summarize([1.0, 2.0, 3.0, 4.0, 5.0])
    assert s.mean == 3.0
    assert s.median == 3.0
    assert_allclose(s.skewness, 0.0, atol=1e-12)


def test_summarize_constant_sample():
    s = summarize([1.0, 1.0, 1.0, 1.0])
    assert s.mean == s.median == 1.0
    assert s.std_dev == s.mad == s.iqr == 0.0
    assert s.skewness is None
    assert s.excess_kurtosis is None


def test_summarize_needs_four():
    with pytest.raises(InsufficientDataError):
        summarize([1.0, 2.0, 3.0])


def test_summarize_affine_equivariance():
    rng = np.random.default_rng(11)
    x = rng.normal(10.0, 2.0, size=60)
    a, b = -2.5, 7.0
    s0 = summarize(x)
    s1 = summarize(a * x + b)
    assert_allclose(s1.mean, a * s0.mean + b, rtol=1e-12)
    assert_allclose(s1.median, a * s0.median + b, rtol=1e-12)
    assert_allclose(s1.std_dev, abs(a) * s0.std_dev, rtol=1e-12)
    assert_allclose(s1.mad, abs(a) * s0.mad, rtol=1e-12)
    assert_allclose(s1.iqr, abs(a) * s0.iqr, rtol=1e-12)
    assert_allclose(s1.min, a * s0.max + b, rtol=1e-12)  # a < 0 swaps extremes
    assert_allclose(s1.skewness, -s0.skewness, rtol=1e-9)
    assert_allclose(s1.excess_kurtosis, s0.excess_kurtosis, rtol=1e-9)


def test_trimmed_mean_alpha_zero_is_mean():
    x = [3.0, 1.0, 4.0, 1.0, 5.0]
    assert_allclose(trimmed_mean(x, 0.0), np.mean(x), rtol=1e-15)


def test_trimmed_mean_hand_case():
    assert trimmed_mean([1.0, 2.0, 3.0, 4.0, 100.0], 0.2) == 3.0


def test_trimmed_mean_constant():
    assert trimmed_mean([5.0, 5.0, 5.0], 0.3) == 5.0


def test_trimmed_mean_monotone_in_single_value():
    rng = np.random.default_rng(5)
    x = rng.normal(size=15)
    base = trimmed_mean(x, 0.2)
    for bump in (0.5, 2.0, 50.0):
        y = x.copy()
        y[3] += bump
        assert trimmed_mean(y, 0.2) >= base - 1e-15


def test_trimmed_mean_rejects_empty_and_bad_alpha():
    with pytest.raises(InsufficientDataError):
        trimmed_mean([], 0.2)
    with pytest.raises(ValueError):
        trimmed_mean([1.0, 2.0], 0.5)


def test_l1_equals_mean():
    rng = np.random.default_rng(2)
    x = rng.gamma(2.0, 3.0, size=25)
    lm = l_moments(x)
    assert_allclose(lm.l1, np.mean(x), rtol=1e-12)


def test_lmoments_symmetric_tau3_zero():
    lm = l_moments([1.0, 2.0, 3.0, 4.0, 5.0])
    assert abs(lm.tau3) < 1e-12


def test_lmoments_two_point_pwm():
    betas = probability_weighted_moments([0.0, 1.0], max_order=2)
    assert_allclose(betas[0], 0.5, rtol=1e-15)
    assert_allclose(betas[1], 0.5, rtol=1e-15)
    # L2 = 2*beta1 - beta0 = 0.5
    assert_allclose(2 * betas[1] - betas[0], 0.5, rtol=1e-15)


def test_lmoments_constant_sample():
    with pytest.raises(ZeroL2Error):
        l_moments([2.0, 2.0, 2.0, 2.0])


def _pwm_bruteforce(x, j):
    """beta_j as the subset-maximum expectation: E[max of (j+1)-subset]/(j+1)."""
    x = np.sort(np.asarray(x, dtype=float))
    subs = list(itertools.combinations(x, j + 1))
    return float(np.mean([max(s) for s in subs]) / (j + 1))


def test_pwm_matches_subset_enumeration():
    rng = np.random.default_rng(7)
    for n in (4, 5, 6):
        x = rng.integers(-20, 60, size=n).astype(float)
        betas = probability_weighted_moments(x, max_order=4)
        for j in range(4):
            assert_allclose(betas[j], _pwm_bruteforce(x, j), rtol=1e-12, atol=1e-12)


def test_lmoment_linearity():
    rng = np.random.default_rng(9)
    x = rng.normal(3.0, 2.0, size=30)
    a, b = -1.7, 4.2
    lm0 = l_moments(x)
    lm1 = l_moments(a * x + b)
    assert_allclose(lm1.l1, a * lm0.l1 + b, rtol=1e-10)
    assert_allclose(lm1.l2, abs(a) * lm0.l2, rtol=1e-10)
    assert_allclose(lm1.tau3, math.copysign(1, a) * lm0.tau3, rtol=1e-9, atol=1e-12)
    assert_allclose(lm1.tau4, lm0.tau4, rtol=1e-9, atol=1e-12)


def test_kde_integrates_to_one():
    rng = np.random.default_rng(21)
    x = rng.normal(5.0, 2.0, size=200)
    est = kde(x)
    mass = np.trapezoid(est.density, est.grid)
    assert 0.99 <= mass <= 1.01
    assert np.all(est.density >= 0.0)


def test_kde_two_point_symmetry():
    est = kde([-1.0, 1.0])
    flipped = est.density[::-1]
    assert np.max(np.abs(est.density - flipped)) < 1e-10


def test_kde_bandwidth_matches_silverman():
    rng = np.random.default_rng(100)
    x = rng.standard_normal(100)
    est = kde(x)
    sigma = np.std(x, ddof=1)
    q1, q3 = np.quantile(x, [0.25, 0.75])
    h = 0.9 * min(sigma, (q3 - q1) / 1.34) * 100 ** (-0.2)
    assert est.bandwidth == h


def test_kde_constant_sample():
    with pytest.raises(ZeroBandwidthError):
        kde([2.0, 2.0, 2.0])
    with pytest.raises(InsufficientDataError):
        kde([2.0])


def test_skewness_kurtosis_none_for_constant():
    assert skewness([1.0, 1.0]) is None
    assert excess_kurtosis([1.0, 1.0]) is None


def test_silverman_uses_smaller_of_sigma_iqr():
    # heavy-tailed sample: IQR/1.34 < sigma
    rng = np.random.default_rng(17)
    x = rng.standard_t(2, size=500)
    sigma = np.std(x, ddof=1)
    q1, q3 = np.quantile(x, [0.25, 0.75])
    assert silverman_bandwidth(x) == 0.9 * min(sigma, (q3 - q1) / 1.34) * 500 ** (-0.2)


def test_summary_one_row_csv():
    s = summarize([1.0, 2.0, 3.0, 4.0, 5.0])
    text = s.as_csv()
    header, row = text.strip().split("\n")
    assert header.split(",") == list(s.FIELDS)
    cells = row.split(",")
    assert float(cells[1]) == s.mean
    constant = summarize([2.0] * 6).as_csv().strip().split("\n")[1]
    assert constant.split(",")[-1] == ""  # undefined kurtosis serializes empty
