"""Ensemble anomaly detection over one segment of a daily series.

Three detectors vote per date: an isolation forest and a one-class SVM run on
a 2-D feature vector (robust-standardized level, robust-standardized one-day
log return), while the statistical detector applies the 1.5*IQR fence rule to
the raw levels.  A date is anomalous when at least 2 of 3 methods vote -1;
the weighted ensemble score combines min-max normalized per-method scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date as Date

import numpy as np

from .errors import (
    InsufficientDataError,
    MethodOutputMismatchError,
    SolverNotConvergedError,
    ZeroMADError,
)
from .series import ObservationSeries, log_returns

DEFAULT_WEIGHTS = (0.4, 0.4, 0.2)

METHOD_ISOLATION_FOREST = "IsolationForest"
METHOD_ONE_CLASS_SVM = "OneClassSVM"
METHOD_STATISTICAL = "Statistical"


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-date detector input; rows are dates that carry a one-day return."""

    dates: tuple[Date, ...]
    features: np.ndarray  # shape (n, 2): standardized level, standardized return
    levels: np.ndarray  # raw level per row
    returns: np.ndarray  # raw log return per row
    medians: np.ndarray
    mads: np.ndarray


@dataclass(frozen=True)
class MethodOutput:
    method: str
    dates: tuple[Date, ...]
    raw_scores: np.ndarray  # oriented so larger = more anomalous
    votes: np.ndarray  # -1 anomaly, +1 normal


@dataclass(frozen=True)
class AnomalyVerdict:
    date: Date
    method_votes: dict[str, int]
    raw_scores: dict[str, float]
    normalized_scores: dict[str, float]
    ensemble_score: float
    is_anomaly: bool


def build_features(segment: ObservationSeries) -> FeatureMatrix:
    """2-D robust-standardized features for every date with a return.

    Standardization subtracts the median and divides by the MAD of each
    column, both computed over the segment's feature rows.
    """
    rets = log_returns(segment)
    if len(rets) < 2:
        raise InsufficientDataError("feature construction needs at least 2 returns")
    by_date = {d: v for d, v, m in zip(segment.dates, segment.values, segment.missing_mask) if not m}
    levels = np.array([by_date[d] for d in rets.dates])
    raw = np.column_stack([levels, rets.log_returns])
    medians = np.median(raw, axis=0)
    mads = np.median(np.abs(raw - medians), axis=0)
    if np.any(mads == 0.0):
        raise ZeroMADError("a feature column has zero MAD; cannot standardize")
    return FeatureMatrix(
        dates=rets.dates,
        features=(raw - medians) / mads,
        levels=levels,
        returns=np.asarray(rets.log_returns),
        medians=medians,
        mads=mads,
    )


# --- Isolation forest -------------------------------------------------------

_HARMONIC_CACHE = [0.0]


def _harmonic(k: int) -> float:
    while len(_HARMONIC_CACHE) <= k:
        _HARMONIC_CACHE.append(_HARMONIC_CACHE[-1] + 1.0 / len(_HARMONIC_CACHE))
    return _HARMONIC_CACHE[k]


def average_path_length(m: int) -> float:
    """c(m) = 2 H(m-1) - 2 (m-1)/m; expected unsuccessful-search depth."""
    if m <= 1:
        return 0.0
    return 2.0 * _harmonic(m - 1) - 2.0 * (m - 1) / m


def _grow(sample: np.ndarray, query: np.ndarray, data: np.ndarray, depth: int,
          cap: int, rng: np.random.Generator, total: np.ndarray) -> None:
    """Grow one subtree over `sample` rows, routing `query` indices with it.

    Query points reaching an external node collect depth + c(leaf sample
    size); splits pick a non-constant attribute uniformly and a cut point
    uniformly within the node's attribute range.
    """
    n = sample.shape[0]
    if n <= 1 or depth >= cap:
        total[query] += depth + average_path_length(n)
        return
    lo = sample.min(axis=0)
    hi = sample.max(axis=0)
    eligible = np.flatnonzero(hi > lo)
    if eligible.size == 0:
        total[query] += depth + average_path_length(n)
        return
    axis = int(eligible[rng.integers(0, eligible.size)])
    threshold = float(rng.uniform(lo[axis], hi[axis]))
    below = sample[:, axis] < threshold
    q_below = data[query, axis] < threshold
    _grow(sample[below], query[q_below], data, depth + 1, cap, rng, total)
    _grow(sample[~below], query[~q_below], data, depth + 1, cap, rng, total)


def isolation_forest(
    features: FeatureMatrix,
    trees: int = 300,
    subsample: int = 256,
    contamination: float = 0.05,
    seed: int = 0,
) -> MethodOutput:
    """Isolation-forest scores s = 2^(-E[h]/c(psi)) with quantile voting.

    Tree height is capped at ceil(log2(psi)); per-tree generators derive
    from (seed, tree index), so results are reproducible bit-for-bit.  A
    point votes -1 when its score strictly exceeds the (1 - contamination)
    quantile of the training scores, so exact score ties at the threshold
    are never flagged and ties above it all are.
    """
    data = features.features
    n = data.shape[0]
    if n < 8:
        raise InsufficientDataError("isolation forest needs at least 8 rows")
    psi = min(subsample, n)
    cap = max(1, math.ceil(math.log2(psi)))

    total_path = np.zeros(n)
    all_idx = np.arange(n)
    for t in range(trees):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(t,)))
        )
        sample = data[rng.choice(n, size=psi, replace=False)] if psi < n else data
        _grow(sample, all_idx, data, 0, cap, rng, total_path)

    expected = total_path / trees
    scores = np.power(2.0, -expected / average_path_length(psi))
    threshold = float(np.quantile(scores, 1.0 - contamination))
    votes = np.where(scores > threshold, -1, 1)
    return MethodOutput(METHOD_ISOLATION_FOREST, features.dates, scores, votes)


# --- One-class SVM ----------------------------------------------------------


def rbf_gram(x: np.ndarray, gamma: float) -> np.ndarray:
    sq = np.sum(x**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-gamma * d2)


def _solve_one_class_dual(
    gram: np.ndarray, upper: float, tol: float, max_iter: int
) -> np.ndarray:
    """Minimize one-half alpha' K alpha subject to 0 <= alpha <= upper,
    sum(alpha) = 1, by SMO with second-order working-set selection."""
    n = gram.shape[0]
    alpha = np.full(n, 1.0 / n)
    grad = gram @ alpha
    tau = 1e-12

    for _ in range(max_iter):
        # i: steepest-descent candidate among coordinates that can grow.
        can_up = alpha < upper - tau
        can_down = alpha > tau
        if not can_up.any() or not can_down.any():
            return alpha
        neg_grad = -grad
        i = int(np.flatnonzero(can_up)[np.argmax(neg_grad[can_up])])
        g_max = neg_grad[i]
        g_min = float(np.min(neg_grad[can_down]))
        if g_max - g_min < tol:
            return alpha

        # j: best second-order decrease among coordinates that can shrink.
        b_vec = g_max + grad
        quad = gram[i, i] + np.diag(gram) - 2.0 * gram[i]
        np.maximum(quad, tau, out=quad)
        feasible = can_down & (b_vec > 0)
        if not feasible.any():
            return alpha
        objective = -(b_vec**2) / quad
        objective[~feasible] = np.inf
        j = int(np.argmin(objective))

        old_i, old_j = alpha[i], alpha[j]
        delta = b_vec[j] / quad[j]
        paired = old_i + old_j
        new_i = min(max(old_i + delta, 0.0), upper)
        new_j = paired - new_i
        if new_j < 0.0:
            new_j = 0.0
            new_i = paired
        elif new_j > upper:
            new_j = upper
            new_i = paired - new_j
        alpha[i], alpha[j] = new_i, new_j
        grad += gram[:, i] * (new_i - old_i) + gram[:, j] * (new_j - old_j)
    raise SolverNotConvergedError(max_iter)


def one_class_svm(
    features: FeatureMatrix,
    nu: float = 0.05,
    gamma: float | None = None,
    tol: float = 1e-6,
    max_iter: int = 200_000,
) -> MethodOutput:
    """nu-one-class SVM with RBF kernel solved by a pairwise SMO optimizer.

    gamma defaults to 1 / (d * var(X)) over all standardized feature entries.
    The raw anomaly score is the negated decision value f(x) = g(x) - rho.

    Votes: strictly negative decision values vote -1.  Free support vectors
    sit exactly on the boundary (f = 0, where the sign is undefined); those
    are assigned the anomalous vote in descending dual-coefficient order
    while the total stays within the nu capacity floor(nu * n).  This keeps
    the training-outlier fraction at or below nu even when the dual is
    boundary-degenerate (no coefficient reaches its box bound, which happens
    when several extreme points are mutually distant in kernel space).
    """
    x = features.features
    n = x.shape[0]
    if n < 8:
        raise InsufficientDataError("one-class SVM needs at least 8 rows")
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    if gamma is None:
        gamma = 1.0 / (x.shape[1] * float(np.var(x)))
    gram = rbf_gram(x, gamma)
    upper = 1.0 / (nu * n)
    alpha = _solve_one_class_dual(gram, upper, tol, max_iter)

    g = gram @ alpha
    tau = 1e-8 * upper
    free = (alpha > tau) & (alpha < upper - tau)
    if free.any():
        rho = float(np.mean(g[free]))
    else:
        at_upper = alpha >= upper - tau
        at_zero = alpha <= tau
        hi = float(np.max(g[at_upper])) if at_upper.any() else float(np.min(g))
        lo = float(np.min(g[at_zero])) if at_zero.any() else float(np.max(g))
        rho = 0.5 * (hi + lo)
    decision = g - rho

    boundary_tol = 10.0 * tol
    votes = np.ones(n, dtype=int)
    votes[decision < -boundary_tol] = -1
    capacity = int(math.floor(nu * n)) - int((votes == -1).sum())
    if capacity > 0:
        on_boundary = np.flatnonzero((np.abs(decision) <= boundary_tol) & (votes == 1))
        ranked = on_boundary[np.argsort(-alpha[on_boundary], kind="stable")]
        votes[ranked[:capacity]] = -1
    return MethodOutput(METHOD_ONE_CLASS_SVM, features.dates, -decision, votes)


# --- Statistical (IQR fence) -------------------------------------------------


def iqr_detector(values, dates: tuple[Date, ...] | None = None) -> MethodOutput:
    """1.5*IQR fence votes on raw levels; score 1 outside the fences else 0.

    Raises:
        InsufficientDataError: fewer than 4 values.
    """
    x = np.asarray(values, dtype=float)
    if x.size < 4:
        raise InsufficientDataError("IQR rule needs at least 4 values")
    q1, q3 = np.quantile(x, [0.25, 0.75])
    iqr = q3 - q1
    low = q1 - 1.5 * iqr
    high = q3 + 1.5 * iqr
    outside = (x < low) | (x > high)
    votes = np.where(outside, -1, 1)
    if dates is None:
        dates = tuple(Date.fromordinal(1 + i) for i in range(x.size))
    return MethodOutput(METHOD_STATISTICAL, dates, outside.astype(float), votes)


# --- Ensemble -----------------------------------------------------------------


def _minmax(values: np.ndarray) -> np.ndarray:
    lo = float(values.min())
    hi = float(values.max())
    if hi == lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def ensemble(
    forest: MethodOutput,
    svm: MethodOutput,
    statistical: MethodOutput,
    weights: tuple[float, float, float] = DEFAULT_WEIGHTS,
) -> list[AnomalyVerdict]:
    """Weighted ensemble score and 2-of-3 consensus voting per date.

    The statistical detector may cover a superset of the feature dates (it
    sees the whole segment); the other two must match exactly.

    Raises:
        MethodOutputMismatchError: date sets cannot be aligned.
    """
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError("ensemble weights must sum to 1")
    if forest.dates != svm.dates:
        raise MethodOutputMismatchError("isolation forest and SVM date sets differ")
    stat_index = {d: i for i, d in enumerate(statistical.dates)}
    missing = [d for d in forest.dates if d not in stat_index]
    if missing:
        raise MethodOutputMismatchError(f"statistical detector lacks dates {missing[:3]}")
    stat_rows = [stat_index[d] for d in forest.dates]

    psi_if = _minmax(forest.raw_scores)
    psi_svm = _minmax(svm.raw_scores)
    psi_stat = (statistical.votes[stat_rows] == -1).astype(float)
    w_if, w_svm, w_stat = weights
    psi = w_if * psi_if + w_svm * psi_svm + w_stat * psi_stat
    score = _minmax(psi)

    verdicts = []
    for k, d in enumerate(forest.dates):
        votes = {
            METHOD_ISOLATION_FOREST: int(forest.votes[k]),
            METHOD_ONE_CLASS_SVM: int(svm.votes[k]),
            METHOD_STATISTICAL: int(statistical.votes[stat_rows[k]]),
        }
        verdicts.append(
            AnomalyVerdict(
                date=d,
                method_votes=votes,
                raw_scores={
                    METHOD_ISOLATION_FOREST: float(forest.raw_scores[k]),
                    METHOD_ONE_CLASS_SVM: float(svm.raw_scores[k]),
                    METHOD_STATISTICAL: float(statistical.raw_scores[stat_rows[k]]),
                },
                normalized_scores={
                    METHOD_ISOLATION_FOREST: float(psi_if[k]),
                    METHOD_ONE_CLASS_SVM: float(psi_svm[k]),
                    METHOD_STATISTICAL: float(psi_stat[k]),
                },
                ensemble_score=float(score[k]),
                is_anomaly=sum(1 for v in votes.values() if v == -1) >= 2,
            )
        )
    return verdicts


def detect_segment(
    segment: ObservationSeries,
    trees: int = 300,
    subsample: int = 256,
    contamination: float = 0.05,
    nu: float = 0.05,
    weights: tuple[float, float, float] = DEFAULT_WEIGHTS,
    seed: int = 0,
) -> list[AnomalyVerdict]:
    """Full detection pipeline over one segment.

    IQR fences are computed from every observed level in the segment; the
    ensemble is evaluated on the dates that carry a return.
    """
    features = build_features(segment)
    forest = isolation_forest(
        features, trees=trees, subsample=subsample, contamination=contamination, seed=seed
    )
    svm = one_class_svm(features, nu=nu)
    statistical = iqr_detector(segment.observed(), dates=segment.observed_dates())
    return ensemble(forest, svm, statistical, weights=weights)
