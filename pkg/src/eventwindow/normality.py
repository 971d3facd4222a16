"""Five-test normality battery with a >=3-of-5 majority decision rule.

Shapiro-Wilk is delegated to scipy (Royston's AS R94 approximation); the
other four statistics are computed here so that the moment-based tests reuse
this package's biased 1/n skewness/kurtosis definitions.  Anderson-Darling
and Lilliefors p-values are approximations (Stephens piecewise formula and
Dallal-Wilkinson respectively); the battery decides Anderson-Darling against
the 0.05 critical value for the estimated-parameters case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import stats as spstats

from .descriptive import excess_kurtosis, skewness
from .errors import (
    InsufficientDataError,
    SampleSizeOutOfRangeError,
    ZeroVarianceError,
)

ALPHA = 0.05

# 5% critical value of the adjusted Anderson-Darling statistic when mean and
# variance are estimated from the sample.
_AD_CRITICAL_05 = 0.787


class NormalityTest(str, Enum):
    SHAPIRO_WILK = "ShapiroWilk"
    ANDERSON_DARLING = "AndersonDarling"
    JARQUE_BERA = "JarqueBera"
    DAGOSTINO_PEARSON = "DAgostinoPearson"
    LILLIEFORS = "Lilliefors"


@dataclass(frozen=True)
class NormalityResult:
    test_name: NormalityTest
    statistic: float
    p_value: float
    rejects_at_05: bool

    def as_dict(self) -> dict:
        return {
            "test": self.test_name.value,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "rejects": self.rejects_at_05,
        }


@dataclass(frozen=True)
class BatteryVerdict:
    results: tuple[NormalityResult, ...]
    rejections: int
    non_normal: bool

    def as_dict(self) -> dict:
        return {
            "tests": [r.as_dict() for r in self.results],
            "rejections": self.rejections,
            "non_normal": self.non_normal,
        }


def _check(sample, minimum: int, what: str) -> np.ndarray:
    x = np.asarray(sample, dtype=float)
    if x.size < minimum:
        raise InsufficientDataError(f"{what} needs n >= {minimum}, got {x.size}")
    if np.ptp(x) == 0.0:
        raise ZeroVarianceError(f"{what} undefined for a constant sample")
    return x


def shapiro_wilk(sample) -> NormalityResult:
    """Royston's W test, valid for 3 <= n <= 5000."""
    x = np.asarray(sample, dtype=float)
    if not 3 <= x.size <= 5000:
        raise SampleSizeOutOfRangeError(f"Shapiro-Wilk supports 3 <= n <= 5000, got {x.size}")
    if np.ptp(x) == 0.0:
        raise ZeroVarianceError("Shapiro-Wilk undefined for a constant sample")
    w, p = spstats.shapiro(x)
    return NormalityResult(NormalityTest.SHAPIRO_WILK, float(w), float(p), bool(p < ALPHA))


def anderson_darling(sample) -> NormalityResult:
    """A^2 with estimated mean/sigma, small-sample adjusted.

    The decision is taken against the 0.05 critical value 0.787; the reported
    p-value is the Stephens piecewise approximation for the adjusted statistic.
    """
    x = _check(sample, 8, "Anderson-Darling")
    n = x.size
    z = np.sort((x - x.mean()) / x.std(ddof=1))
    i = np.arange(1, n + 1)
    log_cdf = spstats.norm.logcdf(z)
    log_sf = spstats.norm.logsf(z[::-1])
    a2 = -n - np.mean((2 * i - 1) * (log_cdf + log_sf))
    a2_adj = a2 * (1.0 + 0.75 / n + 2.25 / n**2)

    if a2_adj >= 0.6:
        p = math.exp(1.2937 - 5.709 * a2_adj + 0.0186 * a2_adj**2)
    elif a2_adj >= 0.34:
        p = math.exp(0.9177 - 4.279 * a2_adj - 1.38 * a2_adj**2)
    elif a2_adj > 0.2:
        p = 1 - math.exp(-8.318 + 42.796 * a2_adj - 59.938 * a2_adj**2)
    else:
        p = 1 - math.exp(-13.436 + 101.14 * a2_adj - 223.73 * a2_adj**2)
    p = min(max(p, 0.0), 1.0)
    return NormalityResult(
        NormalityTest.ANDERSON_DARLING, float(a2_adj), float(p), bool(a2_adj > _AD_CRITICAL_05)
    )


def jarque_bera(sample) -> NormalityResult:
    """JB = n/6 * (skew^2 + kurt^2/4) against chi-square(2)."""
    x = _check(sample, 8, "Jarque-Bera")
    g1 = skewness(x)
    g2 = excess_kurtosis(x)
    jb = x.size / 6.0 * (g1**2 + g2**2 / 4.0)
    p = float(spstats.chi2.sf(jb, 2))
    return NormalityResult(NormalityTest.JARQUE_BERA, float(jb), p, bool(p < ALPHA))


def _skewness_z(g1: float, n: int) -> float:
    # D'Agostino (1970) normalizing transformation.
    y = g1 * math.sqrt((n + 1) * (n + 3) / (6.0 * (n - 2)))
    beta2 = 3.0 * (n**2 + 27 * n - 70) * (n + 1) * (n + 3) / ((n - 2) * (n + 5) * (n + 7) * (n + 9))
    w2 = -1.0 + math.sqrt(2.0 * (beta2 - 1.0))
    delta = 1.0 / math.sqrt(math.log(math.sqrt(w2)))
    alpha = math.sqrt(2.0 / (w2 - 1.0))
    if y == 0.0:
        return 0.0
    return delta * math.log(y / alpha + math.sqrt((y / alpha) ** 2 + 1.0))


def _kurtosis_z(g2: float, n: int) -> float:
    # Anscombe-Glynn (1983) transformation of the (non-excess) kurtosis b2.
    b2 = g2 + 3.0
    e_b2 = 3.0 * (n - 1) / (n + 1)
    var_b2 = 24.0 * n * (n - 2) * (n - 3) / ((n + 1) ** 2 * (n + 3) * (n + 5))
    xstat = (b2 - e_b2) / math.sqrt(var_b2)
    sqrt_beta1 = (
        6.0
        * (n**2 - 5 * n + 2)
        / ((n + 7) * (n + 9))
        * math.sqrt(6.0 * (n + 3) * (n + 5) / (n * (n - 2) * (n - 3)))
    )
    a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + math.sqrt(1.0 + 4.0 / sqrt_beta1**2))
    denom = 1.0 + xstat * math.sqrt(2.0 / (a - 4.0))
    term = (1.0 - 2.0 / a) / abs(denom)
    term = math.copysign(abs(term) ** (1.0 / 3.0), denom)
    return (1.0 - 2.0 / (9.0 * a) - term) / math.sqrt(2.0 / (9.0 * a))


def dagostino_pearson(sample) -> NormalityResult:
    """Omnibus K^2 = Z(skew)^2 + Z(kurt)^2 against chi-square(2)."""
    x = _check(sample, 20, "D'Agostino-Pearson")
    z1 = _skewness_z(skewness(x), x.size)
    z2 = _kurtosis_z(excess_kurtosis(x), x.size)
    k2 = z1**2 + z2**2
    p = float(spstats.chi2.sf(k2, 2))
    return NormalityResult(NormalityTest.DAGOSTINO_PEARSON, float(k2), p, bool(p < ALPHA))


def lilliefors(sample) -> NormalityResult:
    """Two-sided KS distance from the fitted normal, Dallal-Wilkinson p-value."""
    x = _check(sample, 5, "Lilliefors")
    n = x.size
    z = np.sort((x - x.mean()) / x.std(ddof=1))
    cdf = spstats.norm.cdf(z)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - cdf)
    d_minus = np.max(cdf - (i - 1) / n)
    d = float(max(d_plus, d_minus))

    if n > 100:
        d_used = d * (n / 100.0) ** 0.49
        n_used = 100.0
    else:
        d_used = d
        n_used = float(n)
    p = math.exp(
        -7.01256 * d_used**2 * (n_used + 2.78019)
        + 2.99587 * d_used * math.sqrt(n_used + 2.78019)
        - 0.122119
        + 0.974598 / math.sqrt(n_used)
        + 1.67997 / n_used
    )
    p = min(max(p, 0.0), 1.0)
    return NormalityResult(NormalityTest.LILLIEFORS, d, float(p), bool(p < ALPHA))


_BATTERY = (shapiro_wilk, anderson_darling, jarque_bera, dagostino_pearson, lilliefors)


def battery(sample) -> BatteryVerdict:
    """Run all five tests; the sample is non-normal iff at least 3 reject at 0.05."""
    results = tuple(test(sample) for test in _BATTERY)
    rejections = int(sum(r.rejects_at_05 for r in results))
    return BatteryVerdict(results=results, rejections=rejections, non_normal=rejections >= 3)
