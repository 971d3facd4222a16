"""Two-sample procedures: Brown-Forsythe, Cliff's Delta, Kolmogorov-Smirnov,
and Mann-Whitney U.

Tie conventions: sgn(0) = 0 in Cliff's Delta, midranks in Mann-Whitney, and
the KS supremum is evaluated at the pooled order statistics of the
right-continuous ECDFs.  The Mann-Whitney statistic is oriented on the first
sample (number of (a, b) pairs with a > b, ties counting one half), which is
the convention the reported tables use.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special as spspecial
from scipy import stats as spstats

from .errors import (
    DegenerateDeviationsError,
    EmptySampleError,
    InsufficientDataError,
)
from .resample import BootstrapPlan, BootstrapSummary, bootstrap_test

# |delta| thresholds separating negligible / small / medium / large effects.
_DELTA_THRESHOLDS = (0.147, 0.33, 0.474)

# Pooled size at or below which the Mann-Whitney p-value is computed by exact
# enumeration of group assignments.
_EXACT_LIMIT = 16


class TwoSampleTest(str, Enum):
    BROWN_FORSYTHE = "BrownForsythe"
    CLIFFS_DELTA = "CliffsDelta"
    KOLMOGOROV_SMIRNOV = "KolmogorovSmirnov"
    MANN_WHITNEY_U = "MannWhitneyU"


class EffectLabel(str, Enum):
    NEGLIGIBLE = "negligible"
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"


@dataclass(frozen=True)
class TwoSampleOutcome:
    test_name: TwoSampleTest
    statistic: float
    classical_p: float | None
    bootstrap: BootstrapSummary | None
    effect_label: EffectLabel | None

    def as_dict(self) -> dict:
        boot = self.bootstrap
        return {
            "test": self.test_name.value,
            "statistic": self.statistic,
            "p_value": self.classical_p,
            "bootstrap_p": boot.empirical_p if boot else None,
            "ci_low": boot.ci_low if boot else None,
            "ci_high": boot.ci_high if boot else None,
            "rejection_ratio": boot.rejection_ratio if boot else None,
            "effect": self.effect_label.value if self.effect_label else None,
        }


def _as_samples(a, b, minimum: int = 1) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    if x.size == 0 or y.size == 0:
        raise EmptySampleError("both samples must be non-empty")
    if x.size < minimum or y.size < minimum:
        raise InsufficientDataError(f"each group needs n >= {minimum}")
    return x, y


def brown_forsythe_statistic(a, b) -> tuple[float, float]:
    """F on absolute deviations from the group medians; p from F(1, N-2)."""
    x, y = _as_samples(a, b, minimum=3)
    za = np.abs(x - np.median(x))
    zb = np.abs(y - np.median(y))
    pooled = np.concatenate([za, zb])
    ssw = float(np.sum((za - za.mean()) ** 2) + np.sum((zb - zb.mean()) ** 2))
    if ssw == 0.0:
        raise DegenerateDeviationsError("all absolute deviations equal; F undefined")
    grand = pooled.mean()
    n1, n2 = x.size, y.size
    ssb = n1 * (za.mean() - grand) ** 2 + n2 * (zb.mean() - grand) ** 2
    df2 = n1 + n2 - 2
    f = (df2 * ssb) / ssw
    p = float(spstats.f.sf(f, 1, df2))
    return float(f), p


def brown_forsythe(a, b, plan: BootstrapPlan | None = None, alpha: float = 0.05) -> TwoSampleOutcome:
    f, p = brown_forsythe_statistic(a, b)
    boot = bootstrap_test(a, b, brown_forsythe_statistic, plan, alpha) if plan else None
    return TwoSampleOutcome(TwoSampleTest.BROWN_FORSYTHE, f, p, boot, None)


def cliffs_delta_statistic(a, b) -> tuple[float, None]:
    """delta = (#(a > b) - #(a < b)) / (n1 * n2); no classical p-value."""
    x, y = _as_samples(a, b)
    sorted_y = np.sort(y)
    greater = np.searchsorted(sorted_y, x, side="left").sum()
    greater_or_equal = np.searchsorted(sorted_y, x, side="right").sum()
    less = x.size * y.size - greater_or_equal
    delta = (int(greater) - int(less)) / (x.size * y.size)
    return float(delta), None


def effect_label(delta: float) -> EffectLabel:
    mag = abs(delta)
    if mag < _DELTA_THRESHOLDS[0]:
        return EffectLabel.NEGLIGIBLE
    if mag < _DELTA_THRESHOLDS[1]:
        return EffectLabel.SMALL
    if mag < _DELTA_THRESHOLDS[2]:
        return EffectLabel.MEDIUM
    return EffectLabel.LARGE


def cliffs_delta(a, b, plan: BootstrapPlan | None = None, alpha: float = 0.05) -> TwoSampleOutcome:
    """Cliff's Delta with a bootstrap percentile CI (no classical p)."""
    delta, _ = cliffs_delta_statistic(a, b)
    boot = bootstrap_test(a, b, cliffs_delta_statistic, plan, alpha) if plan else None
    return TwoSampleOutcome(TwoSampleTest.CLIFFS_DELTA, delta, None, boot, effect_label(delta))


def ks_statistic(a, b) -> tuple[float, float]:
    """Two-sample sup-distance between ECDFs; asymptotic Kolmogorov p."""
    x, y = _as_samples(a, b)
    pooled = np.concatenate([x, y])
    pooled.sort()
    f1 = np.searchsorted(np.sort(x), pooled, side="right") / x.size
    f2 = np.searchsorted(np.sort(y), pooled, side="right") / y.size
    d = float(np.max(np.abs(f1 - f2)))
    effective = x.size * y.size / (x.size + y.size)
    p = float(spspecial.kolmogorov(math.sqrt(effective) * d))
    return d, min(max(p, 0.0), 1.0)


def ks_two_sample(a, b, plan: BootstrapPlan | None = None, alpha: float = 0.05) -> TwoSampleOutcome:
    d, p = ks_statistic(a, b)
    boot = bootstrap_test(a, b, ks_statistic, plan, alpha) if plan else None
    return TwoSampleOutcome(TwoSampleTest.KOLMOGOROV_SMIRNOV, d, p, boot, None)


def _midranks(pooled: np.ndarray) -> np.ndarray:
    return spstats.rankdata(pooled, method="average")


def mann_whitney_statistic(a, b) -> tuple[float, float]:
    """U of the first sample (midranks) with a two-sided p-value.

    The p-value is exact (enumeration over group assignments, conditional on
    the observed tie pattern) when n1 + n2 <= 16, otherwise a tie-corrected
    normal approximation with continuity correction.
    """
    x, y = _as_samples(a, b)
    n1, n2 = x.size, y.size
    pooled = np.concatenate([x, y])
    ranks = _midranks(pooled)
    r1 = float(ranks[:n1].sum())
    u = r1 - n1 * (n1 + 1) / 2.0
    mu = n1 * n2 / 2.0

    if n1 + n2 <= _EXACT_LIMIT:
        total = 0
        extreme = 0
        observed_dev = abs(u - mu)
        rank_sum_base = n1 * (n1 + 1) / 2.0
        for combo in itertools.combinations(range(n1 + n2), n1):
            u_combo = ranks[list(combo)].sum() - rank_sum_base
            total += 1
            if abs(u_combo - mu) >= observed_dev - 1e-12:
                extreme += 1
        return float(u), extreme / total

    n = n1 + n2
    _, counts = np.unique(pooled, return_counts=True)
    tie_term = float(np.sum(counts**3 - counts)) / (n * (n - 1))
    sigma2 = n1 * n2 / 12.0 * ((n + 1) - tie_term)
    if sigma2 <= 0.0:
        return float(u), 1.0
    z = (abs(u - mu) - 0.5) / math.sqrt(sigma2)
    z = max(z, 0.0)
    p = 2.0 * float(spstats.norm.sf(z))
    return float(u), min(p, 1.0)


def mann_whitney_u(a, b, plan: BootstrapPlan | None = None, alpha: float = 0.05) -> TwoSampleOutcome:
    u, p = mann_whitney_statistic(a, b)
    boot = bootstrap_test(a, b, mann_whitney_statistic, plan, alpha) if plan else None
    return TwoSampleOutcome(TwoSampleTest.MANN_WHITNEY_U, u, p, boot, None)
