"""Robust and classical descriptive statistics.

Conventions used throughout (and relied on by the golden-file tests):

* quartiles interpolate linearly between order statistics (the "type 7"
  rule, position ``(n - 1) * p``), matching ``numpy.quantile`` defaults;
* skewness and kurtosis use the biased 1/n moment definitions, and the
  kurtosis is the excess form (normal = 0);
* the standard deviation uses the n-1 denominator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InsufficientDataError,
    ZeroBandwidthError,
    ZeroL2Error,
)


@dataclass(frozen=True)
class DescriptiveSummary:
    count: int
    mean: float
    median: float
    std_dev: float
    mad: float
    iqr: float
    min: float
    max: float
    trimmed_mean_10: float
    trimmed_mean_20: float
    skewness: float | None
    excess_kurtosis: float | None

    FIELDS = (
        "count",
        "mean",
        "median",
        "std_dev",
        "mad",
        "iqr",
        "min",
        "max",
        "trimmed_mean_10",
        "trimmed_mean_20",
        "skewness",
        "excess_kurtosis",
    )

    def as_dict(self) -> dict:
        """Flat JSON-ready mapping with fixed field names."""
        return {name: getattr(self, name) for name in self.FIELDS}

    def as_csv(self) -> str:
        """One-row CSV (header + values) using the fixed field names."""
        values = []
        for name in self.FIELDS:
            v = getattr(self, name)
            values.append("" if v is None else repr(v) if isinstance(v, float) else str(v))
        return ",".join(self.FIELDS) + "\n" + ",".join(values) + "\n"


@dataclass(frozen=True)
class LMomentSummary:
    l1: float
    l2: float
    tau3: float
    tau4: float

    def as_dict(self) -> dict:
        return {"l1": self.l1, "l2": self.l2, "tau3": self.tau3, "tau4": self.tau4}


@dataclass(frozen=True)
class DensityEstimate:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float


def trimmed_mean(sample, alpha: float) -> float:
    """alpha-trimmed mean: drop floor(alpha*n) order statistics from each tail.

    Raises:
        InsufficientDataError: nothing survives the trim.
    """
    if not 0.0 <= alpha < 0.5:
        raise ValueError("alpha must lie in [0, 0.5)")
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    k = int(math.floor(alpha * n))
    if n - 2 * k < 1:
        raise InsufficientDataError(f"trimming k={k} per tail leaves no data (n={n})")
    return float(np.mean(x[k : n - k]))


def _moments(x: np.ndarray) -> tuple[float, float, float]:
    """Biased central moments (m2, m3, m4)."""
    centered = x - x.mean()
    return (
        float(np.mean(centered**2)),
        float(np.mean(centered**3)),
        float(np.mean(centered**4)),
    )


def skewness(sample) -> float | None:
    """Biased moment skewness; None for a zero-variance sample."""
    x = np.asarray(sample, dtype=float)
    m2, m3, _ = _moments(x)
    if m2 == 0.0:
        return None
    return m3 / m2**1.5


def excess_kurtosis(sample) -> float | None:
    """Biased moment kurtosis minus 3; None for a zero-variance sample."""
    x = np.asarray(sample, dtype=float)
    m2, _, m4 = _moments(x)
    if m2 == 0.0:
        return None
    return m4 / m2**2 - 3.0


def summarize(sample) -> DescriptiveSummary:
    """Full descriptive summary of a sample.

    Constant samples get ``skewness``/``excess_kurtosis`` of None rather than
    a silent NaN.

    Raises:
        InsufficientDataError: fewer than 4 values (quartiles need support).
    """
    x = np.asarray(sample, dtype=float)
    if x.size < 4:
        raise InsufficientDataError("summarize needs at least 4 values")
    med = float(np.median(x))
    q1, q3 = np.quantile(x, [0.25, 0.75])
    return DescriptiveSummary(
        count=int(x.size),
        mean=float(np.mean(x)),
        median=med,
        std_dev=float(np.std(x, ddof=1)),
        mad=float(np.median(np.abs(x - med))),
        iqr=float(q3 - q1),
        min=float(np.min(x)),
        max=float(np.max(x)),
        trimmed_mean_10=trimmed_mean(x, 0.10),
        trimmed_mean_20=trimmed_mean(x, 0.20),
        skewness=skewness(x),
        excess_kurtosis=excess_kurtosis(x),
    )


def probability_weighted_moments(sample, max_order: int = 4) -> list[float]:
    """Unbiased sample PWMs beta_0..beta_{max_order-1}.

    beta_j = (1/n) * sum_i [C(i-1, j) / C(n-1, j)] * x_(i) over the sorted
    sample (1-based i).
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n < max_order:
        raise InsufficientDataError(f"need n >= {max_order} for beta_0..beta_{max_order - 1}")
    betas = []
    for j in range(max_order):
        denom = math.comb(n - 1, j)
        weights = np.array([math.comb(i - 1, j) for i in range(1, n + 1)], dtype=float) / denom
        betas.append(float(np.mean(weights * x) * 1.0))
    return betas


def l_moments(sample, max_order: int = 4) -> LMomentSummary:
    """First four L-moments and the tau3/tau4 ratios.

    L_r = sum_{j=0}^{r-1} (-1)^(r-1-j) C(r-1, j) C(r-1+j, j) beta_j.

    Raises:
        InsufficientDataError: n < 4.
        ZeroL2Error: constant sample, tau ratios undefined.
    """
    if max_order != 4:
        raise ValueError("only the first four L-moments are supported")
    betas = probability_weighted_moments(sample, max_order=4)
    lmoms = []
    for r in range(1, 5):
        total = 0.0
        for j in range(r):
            total += (-1) ** (r - 1 - j) * math.comb(r - 1, j) * math.comb(r - 1 + j, j) * betas[j]
        lmoms.append(total)
    l1, l2, l3, l4 = lmoms
    if l2 == 0.0:
        raise ZeroL2Error("second L-moment is zero; tau ratios undefined")
    return LMomentSummary(l1=l1, l2=l2, tau3=l3 / l2, tau4=l4 / l2)


def silverman_bandwidth(sample) -> float:
    """0.9 * min(sample std, IQR / 1.34) * n^(-1/5)."""
    x = np.asarray(sample, dtype=float)
    sigma = float(np.std(x, ddof=1))
    q1, q3 = np.quantile(x, [0.25, 0.75])
    iqr = float(q3 - q1)
    candidates = [s for s in (sigma, iqr / 1.34) if s > 0]
    if not candidates:
        raise ZeroBandwidthError("sample has zero spread; bandwidth undefined")
    return 0.9 * min(candidates) * x.size ** (-1.0 / 5.0)


def kde(sample, grid_points: int = 512) -> DensityEstimate:
    """Gaussian-kernel density on an even grid spanning [min-3h, max+3h].

    Raises:
        InsufficientDataError: n < 2.
        ZeroBandwidthError: constant sample.
    """
    x = np.asarray(sample, dtype=float)
    if x.size < 2:
        raise InsufficientDataError("kde needs at least 2 values")
    h = silverman_bandwidth(x)
    grid = np.linspace(x.min() - 3 * h, x.max() + 3 * h, grid_points)
    u = (grid[:, None] - x[None, :]) / h
    density = np.exp(-0.5 * u**2).sum(axis=1) / (x.size * h * math.sqrt(2 * math.pi))
    return DensityEstimate(grid=grid, density=density, bandwidth=h)
