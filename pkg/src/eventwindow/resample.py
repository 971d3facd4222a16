"""Seeded bootstrap engine: per-group resampling, empirical p-values,
rejection ratios, and percentile confidence intervals.

Reproducibility contract: the resample drawn for iteration ``b`` of group
``g`` is fully determined by ``(base_seed, b, g)`` via a counter-based
sub-seed derivation (``numpy.random.SeedSequence`` with a spawn key), so
results are independent of execution order and thread count.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import EmptySampleError, EventWindowError

_GROUP_FIRST = 0
_GROUP_SECOND = 1


class ResamplingScheme(str, Enum):
    TWO_SAMPLE_INDEPENDENT = "TwoSampleIndependent"
    SINGLE_SAMPLE = "SingleSample"


@dataclass(frozen=True)
class BootstrapPlan:
    iterations: int = 10_000
    base_seed: int = 42
    scheme: ResamplingScheme = ResamplingScheme.TWO_SAMPLE_INDEPENDENT

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0 <= self.base_seed < 2**64:
            raise ValueError("base_seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class BootstrapSummary:
    """Aggregate of one bootstrap run.

    ``empirical_p`` is the fraction of iterations whose statistic was >= the
    observed one (implemented exactly as printed, one-sided); the rejection
    ratio is the fraction of iterations whose classical p-value fell below
    alpha and carries the inferential weight.  Both are None when the wrapped
    statistic has no classical p-value (e.g. an effect size).
    """

    observed_statistic: float
    empirical_p: float | None
    rejection_ratio: float | None
    ci_low: float
    ci_high: float
    alpha: float
    iterations: int
    seed: int
    degenerate_count: int = 0

    def as_dict(self) -> dict:
        return {
            "observed_statistic": self.observed_statistic,
            "empirical_p": self.empirical_p,
            "rejection_ratio": self.rejection_ratio,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "alpha": self.alpha,
            "iterations": self.iterations,
            "seed": self.seed,
            "degenerate_count": self.degenerate_count,
        }


def _rng(plan: BootstrapPlan, iteration: int, group: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=plan.base_seed, spawn_key=(group, iteration))
    return np.random.Generator(np.random.PCG64(ss))


def _draw(sample: np.ndarray, plan: BootstrapPlan, iteration: int, group: int) -> np.ndarray:
    idx = _rng(plan, iteration, group).integers(0, sample.size, size=sample.size)
    return sample[idx]


def resample_pair(
    pre: Sequence[float],
    post: Sequence[float],
    plan: BootstrapPlan,
    iteration: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Independent with-replacement resamples of both groups, size-preserving.

    Raises:
        EmptySampleError: either input is empty.
    """
    a = np.asarray(pre, dtype=float)
    b = np.asarray(post, dtype=float)
    if a.size == 0 or b.size == 0:
        raise EmptySampleError("cannot resample an empty sample")
    if not 0 <= iteration < plan.iterations:
        raise ValueError(f"iteration {iteration} outside plan range [0, {plan.iterations})")
    return (
        _draw(a, plan, iteration, _GROUP_FIRST),
        _draw(b, plan, iteration, _GROUP_SECOND),
    )


def resample_single(
    sample: Sequence[float], plan: BootstrapPlan, iteration: int
) -> np.ndarray:
    """With-replacement resample of one group (scheme SingleSample)."""
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise EmptySampleError("cannot resample an empty sample")
    if not 0 <= iteration < plan.iterations:
        raise ValueError(f"iteration {iteration} outside plan range [0, {plan.iterations})")
    return _draw(x, plan, iteration, _GROUP_FIRST)


def percentile_ci(values: Sequence[float], alpha: float) -> tuple[float, float]:
    """(Q_{alpha/2}, Q_{1-alpha/2}) with type-7 interpolation.

    Raises:
        EmptySampleError: no values.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise EmptySampleError("percentile interval of an empty sample")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    low, high = np.quantile(x, [alpha / 2.0, 1.0 - alpha / 2.0])
    return float(low), float(high)


def bootstrap_test(
    pre: Sequence[float],
    post: Sequence[float],
    statistic_fn: Callable[[np.ndarray, np.ndarray], tuple[float, float | None]],
    plan: BootstrapPlan,
    alpha: float = 0.05,
) -> BootstrapSummary:
    """Bootstrap a two-sample statistic function returning (statistic, p).

    Degenerate resamples (the statistic function raises a data error) are
    recorded as non-rejecting with p = 1, keep their place in the iteration
    count B, and are tallied in ``degenerate_count``; their statistic is
    excluded from the percentile interval.
    """
    a = np.asarray(pre, dtype=float)
    b = np.asarray(post, dtype=float)
    if a.size == 0 or b.size == 0:
        raise EmptySampleError("cannot bootstrap empty samples")

    observed_stat, observed_p = statistic_fn(a, b)
    has_p = observed_p is not None

    n_iter = plan.iterations
    stats = np.full(n_iter, np.nan)
    ge_observed = 0
    rejected = 0
    degenerate = 0
    for it in range(n_iter):
        ra, rb = resample_pair(a, b, plan, it)
        try:
            stat_b, p_b = statistic_fn(ra, rb)
        except EventWindowError:
            degenerate += 1
            continue
        stats[it] = stat_b
        if stat_b >= observed_stat:
            ge_observed += 1
        if has_p and p_b is not None and p_b < alpha:
            rejected += 1

    valid = stats[~np.isnan(stats)]
    if valid.size == 0:
        raise EmptySampleError("every bootstrap iteration was degenerate")
    ci_low, ci_high = percentile_ci(valid, alpha)
    return BootstrapSummary(
        observed_statistic=float(observed_stat),
        empirical_p=(ge_observed / n_iter) if has_p else None,
        rejection_ratio=(rejected / n_iter) if has_p else None,
        ci_low=ci_low,
        ci_high=ci_high,
        alpha=alpha,
        iterations=n_iter,
        seed=plan.base_seed,
        degenerate_count=degenerate,
    )
