"""Rolling-window variance of log returns and the bootstrap variance-ratio
comparison between segments.

Windows are counted in trading observations, not calendar days, and the
variance ratio is computed on log returns.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date as Date

import numpy as np

from .errors import EventWindowError, InsufficientDataError, ZeroPreVarianceError
from .resample import BootstrapPlan, percentile_ci, resample_pair
from .series import ReturnSeries


@dataclass(frozen=True)
class RollingVolatility:
    window_days: int
    dates: tuple[Date, ...]
    variance: np.ndarray


@dataclass(frozen=True)
class VarianceComparison:
    var_pre: float
    var_post: float
    ratio_post_over_pre: float
    ci_low: float
    ci_high: float
    alpha: float
    degenerate_count: int = 0

    def as_dict(self) -> dict:
        return {
            "var_pre": self.var_pre,
            "var_post": self.var_post,
            "ratio_post_over_pre": self.ratio_post_over_pre,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "alpha": self.alpha,
            "degenerate_count": self.degenerate_count,
        }


def rolling_variance(returns: ReturnSeries, window: int) -> RollingVolatility:
    """Unbiased variance of the trailing ``window`` returns, two-pass form.

    Defined only at dates where the trailing window holds exactly ``window``
    return observations.

    Raises:
        InsufficientDataError: window < 2 or series shorter than the window.
    """
    if window < 2:
        raise InsufficientDataError("rolling window must be >= 2")
    r = np.asarray(returns.log_returns, dtype=float)
    if r.size < window:
        raise InsufficientDataError(f"need at least {window} returns, got {r.size}")
    out = np.empty(r.size - window + 1)
    for i in range(out.size):
        chunk = r[i : i + window]
        mean = chunk.mean()
        out[i] = float(np.sum((chunk - mean) ** 2) / (window - 1))
    return RollingVolatility(
        window_days=window,
        dates=tuple(returns.dates[window - 1 :]),
        variance=out,
    )


def variance_ratio(
    pre_returns,
    post_returns,
    plan: BootstrapPlan,
    alpha: float = 0.05,
) -> VarianceComparison:
    """post/pre ratio of unbiased return variances with a percentile CI.

    The CI resamples each side independently per iteration; iterations where
    the resampled pre variance is zero are skipped (and counted).

    Raises:
        InsufficientDataError: fewer than 3 returns on either side.
        ZeroPreVarianceError: the observed pre variance is zero.
    """
    pre = np.asarray(pre_returns, dtype=float)
    post = np.asarray(post_returns, dtype=float)
    if pre.size < 3 or post.size < 3:
        raise InsufficientDataError("variance ratio needs >= 3 returns per side")
    var_pre = float(np.var(pre, ddof=1))
    var_post = float(np.var(post, ddof=1))
    if var_pre == 0.0:
        raise ZeroPreVarianceError("pre-segment return variance is zero")
    ratio = var_post / var_pre

    ratios = np.full(plan.iterations, np.nan)
    degenerate = 0
    for it in range(plan.iterations):
        ra, rb = resample_pair(pre, post, plan, it)
        vp = float(np.var(ra, ddof=1))
        if vp == 0.0:
            degenerate += 1
            continue
        ratios[it] = float(np.var(rb, ddof=1)) / vp
    valid = ratios[~np.isnan(ratios)]
    if valid.size == 0:
        raise EventWindowError("every bootstrap iteration was degenerate")
    ci_low, ci_high = percentile_ci(valid, alpha)
    return VarianceComparison(
        var_pre=var_pre,
        var_post=var_post,
        ratio_post_over_pre=ratio,
        ci_low=ci_low,
        ci_high=ci_high,
        alpha=alpha,
        degenerate_count=degenerate,
    )
