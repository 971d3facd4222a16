"""Pipeline orchestration and report emission.

``run_full`` wires segmentation, descriptive statistics, the normality
battery, the four bootstrap-wrapped two-sample tests, the anomaly ensemble
(post segment), and the volatility comparison into one deterministic run,
then writes ``report.json``, the two tables, the anomaly list, and plot-data
CSV files.  Every hyperparameter lives in ``RunConfig``; nothing is
hard-coded at call sites.
"""

from __future__ import annotations

import csv
import json
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import date as Date
from pathlib import Path

import numpy as np

from . import anomaly as anomaly_mod
from . import descriptive, normality, nptests, volatility
from .errors import EventWindowError, PipelineError
from .resample import BootstrapPlan, ResamplingScheme
from .series import ObservationSeries, SegmentedSeries, load_csv, log_returns, segment

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RunConfig:
    input_path: str
    event_date: Date
    date_column: str = "date"
    value_column: str = "value"
    window_days: int = 100
    bootstrap_iterations: int = 10_000
    seed: int = 42
    alpha: float = 0.05
    output_dir: str = "out"
    trees: int = 300
    subsample: int = 256
    contamination: float = 0.05
    nu: float = 0.05
    weights: tuple[float, float, float] = anomaly_mod.DEFAULT_WEIGHTS
    volatility_windows: tuple[int, ...] = (7, 14)

    def __post_init__(self):
        if self.window_days < 10:
            raise ValueError("window_days must be >= 10")
        if not 0.0 < self.alpha < 0.5:
            raise ValueError("alpha must lie in (0, 0.5)")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("ensemble weights must sum to 1.0")

    def plan(self) -> BootstrapPlan:
        return BootstrapPlan(
            iterations=self.bootstrap_iterations,
            base_seed=self.seed,
            scheme=ResamplingScheme.TWO_SAMPLE_INDEPENDENT,
        )


@dataclass(frozen=True)
class FullReport:
    config: RunConfig
    segments: SegmentedSeries
    descriptives: dict[str, descriptive.DescriptiveSummary]
    lmoments: dict[str, descriptive.LMomentSummary]
    normality: dict[str, normality.BatteryVerdict]
    tests: list[nptests.TwoSampleOutcome]
    anomalies: list[anomaly_mod.AnomalyVerdict]
    variance: volatility.VarianceComparison
    rolling: list[volatility.RollingVolatility]
    headline_percent_change: float

    def as_dict(self) -> dict:
        cfg = self.config
        return {
            "schema_version": SCHEMA_VERSION,
            "config": {
                "input_path": cfg.input_path,
                "event_date": cfg.event_date.isoformat(),
                "date_column": cfg.date_column,
                "value_column": cfg.value_column,
                "window_days": cfg.window_days,
                "bootstrap_iterations": cfg.bootstrap_iterations,
                "seed": cfg.seed,
                "alpha": cfg.alpha,
                "trees": cfg.trees,
                "subsample": cfg.subsample,
                "contamination": cfg.contamination,
                "nu": cfg.nu,
                "weights": list(cfg.weights),
                "volatility_windows": list(cfg.volatility_windows),
            },
            "segments": {
                name: {
                    "count": int(np.count_nonzero(~seg.missing_mask)),
                    "start": seg.dates[0].isoformat(),
                    "end": seg.dates[-1].isoformat(),
                }
                for name, seg in self._segment_map().items()
            },
            "descriptives": {k: v.as_dict() for k, v in self.descriptives.items()},
            "l_moments": {k: v.as_dict() for k, v in self.lmoments.items()},
            "normality": {k: v.as_dict() for k, v in self.normality.items()},
            "tests": [t.as_dict() for t in self.tests],
            "anomalies": [
                {
                    "date": v.date.isoformat(),
                    "votes": v.method_votes,
                    "raw_scores": v.raw_scores,
                    "normalized_scores": v.normalized_scores,
                    "ensemble_score": v.ensemble_score,
                    "is_anomaly": v.is_anomaly,
                }
                for v in self.anomalies
            ],
            "volatility": self.variance.as_dict(),
            "headline": {
                "pre_mean": self.descriptives["pre"].mean,
                "post_mean": self.descriptives["post"].mean,
                "percent_change": self.headline_percent_change,
            },
        }

    def _segment_map(self) -> dict[str, ObservationSeries]:
        return {"pre": self.segments.pre, "post": self.segments.post, "full": self.segments.full}


@contextmanager
def _stage(name: str):
    try:
        yield
    except PipelineError:
        raise
    except EventWindowError as err:
        raise PipelineError(name, err) from err


def _trim_window(series: ObservationSeries, event_date: Date, window_days: int) -> ObservationSeries:
    from datetime import timedelta

    start = event_date - timedelta(days=window_days)
    end = event_date + timedelta(days=window_days)
    return series.restrict(start, end)


def run_full(config: RunConfig) -> FullReport:
    """Execute the whole pipeline; raises PipelineError naming the failed stage."""
    with _stage("series"):
        series = load_csv(
            config.input_path, value_column=config.value_column, date_column=config.date_column
        )
        series = _trim_window(series, config.event_date, config.window_days)
        seg = segment(series, config.event_date)

    samples = {
        "pre": seg.pre.observed(),
        "post": seg.post.observed(),
        "full": seg.full.observed(),
    }

    with _stage("descriptive"):
        summaries = {k: descriptive.summarize(v) for k, v in samples.items()}
        lmoms = {k: descriptive.l_moments(v) for k, v in samples.items()}

    with _stage("normality"):
        verdicts = {k: normality.battery(v) for k, v in samples.items()}

    plan = config.plan()
    pre, post = samples["pre"], samples["post"]
    with _stage("nptests"):
        tests = [
            nptests.ks_two_sample(pre, post, plan, config.alpha),
            nptests.mann_whitney_u(pre, post, plan, config.alpha),
            nptests.brown_forsythe(pre, post, plan, config.alpha),
            nptests.cliffs_delta(pre, post, plan, config.alpha),
        ]

    with _stage("anomaly"):
        verdict_list = anomaly_mod.detect_segment(
            seg.post,
            trees=config.trees,
            subsample=config.subsample,
            contamination=config.contamination,
            nu=config.nu,
            weights=config.weights,
            seed=config.seed,
        )

    with _stage("volatility"):
        pre_returns = log_returns(seg.pre).log_returns
        post_returns = log_returns(seg.post).log_returns
        comparison = volatility.variance_ratio(pre_returns, post_returns, plan, config.alpha)
        full_returns = log_returns(seg.full)
        rolling = [volatility.rolling_variance(full_returns, w) for w in config.volatility_windows]

    headline = 100.0 * (summaries["post"].mean - summaries["pre"].mean) / summaries["pre"].mean
    return FullReport(
        config=config,
        segments=seg,
        descriptives=summaries,
        lmoments=lmoms,
        normality=verdicts,
        tests=tests,
        anomalies=verdict_list,
        variance=comparison,
        rolling=rolling,
        headline_percent_change=headline,
    )


# --- file emission -----------------------------------------------------------

_TABLE1_ROWS = (
    ("Count", "count", "{:d}"),
    ("Mean", "mean", "{:.2f}"),
    ("Median", "median", "{:.2f}"),
    ("Standard Deviation", "std_dev", "{:.2f}"),
    ("MAD", "mad", "{:.2f}"),
    ("IQR", "iqr", "{:.2f}"),
    ("Minimum", "min", "{:.2f}"),
    ("Maximum", "max", "{:.2f}"),
    ("Skewness", "skewness", "{:.2f}"),
    ("Kurtosis", "excess_kurtosis", "{:.2f}"),
)


def write_table1(summaries: dict[str, descriptive.DescriptiveSummary], path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "pre", "post", "full"])
        for label, attr, fmt in _TABLE1_ROWS:
            row = [label]
            for name in ("pre", "post", "full"):
                value = getattr(summaries[name], attr)
                row.append("" if value is None else fmt.format(value))
            writer.writerow(row)


def write_table2(tests: list[nptests.TwoSampleOutcome], path: Path) -> None:
    columns = (
        "test",
        "statistic",
        "p_value",
        "bootstrap_p",
        "ci_low",
        "ci_high",
        "rejection_ratio",
        "effect",
    )
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for outcome in tests:
            d = outcome.as_dict()
            writer.writerow(
                ["" if d[c] is None else (f"{d[c]:.6g}" if isinstance(d[c], float) else d[c]) for c in columns]
            )


def write_anomalies(verdicts: list[anomaly_mod.AnomalyVerdict], features, path: Path) -> None:
    methods = (
        anomaly_mod.METHOD_ISOLATION_FOREST,
        anomaly_mod.METHOD_ONE_CLASS_SVM,
        anomaly_mod.METHOD_STATISTICAL,
    )
    level = {d: l for d, l in zip(features.dates, features.levels)}
    ret = {d: r for d, r in zip(features.dates, features.returns)}
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["date", "level", "log_return"]
            + [f"vote_{m}" for m in methods]
            + [f"score_{m}" for m in methods]
            + ["ensemble_score", "is_anomaly"]
        )
        for v in verdicts:
            writer.writerow(
                [v.date.isoformat(), f"{level[v.date]:.6g}", f"{ret[v.date]:.8g}"]
                + [v.method_votes[m] for m in methods]
                + [f"{v.normalized_scores[m]:.8g}" for m in methods]
                + [f"{v.ensemble_score:.8g}", int(v.is_anomaly)]
            )


def write_outputs(report: FullReport, output_dir: str | Path) -> dict[str, Path]:
    """Write report.json, tables, anomalies and plot-data files; returns paths."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    plotdata = out / "plotdata"
    plotdata.mkdir(exist_ok=True)
    paths: dict[str, Path] = {}

    report_path = out / "report.json"
    report_path.write_bytes(render_report_json(report))
    paths["report"] = report_path

    table1 = out / "table1.csv"
    write_table1(report.descriptives, table1)
    paths["table1"] = table1

    table2 = out / "table2.csv"
    write_table2(report.tests, table2)
    paths["table2"] = table2

    features = anomaly_mod.build_features(report.segments.post)
    anomalies_path = out / "anomalies.csv"
    write_anomalies(report.anomalies, features, anomalies_path)
    paths["anomalies"] = anomalies_path

    ts_path = plotdata / "timeseries.csv"
    with ts_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "level", "segment"])
        seg = report.segments
        for name, sub in (("pre", seg.pre), ("post", seg.post)):
            for d, v, m in zip(sub.dates, sub.values, sub.missing_mask):
                writer.writerow([d.isoformat(), "" if m else repr(float(v)), name])
    paths["timeseries"] = ts_path

    for name, sample in (
        ("pre", seg.pre.observed()),
        ("post", seg.post.observed()),
        ("full", seg.full.observed()),
    ):
        kde_path = plotdata / f"kde_{name}.csv"
        est = descriptive.kde(sample)
        with kde_path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "density"])
            for x, dens in zip(est.grid, est.density):
                writer.writerow([f"{x:.8g}", f"{dens:.10g}"])
        paths[f"kde_{name}"] = kde_path

    scores_path = plotdata / "anomaly_scores.csv"
    level = {d: l for d, l in zip(features.dates, features.levels)}
    with scores_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "level", "ensemble_score", "flag"])
        for v in report.anomalies:
            writer.writerow(
                [v.date.isoformat(), f"{level[v.date]:.6g}", f"{v.ensemble_score:.8g}", int(v.is_anomaly)]
            )
    paths["anomaly_scores"] = scores_path

    vol_path = plotdata / "rolling_volatility.csv"
    by_window = {rv.window_days: dict(zip(rv.dates, rv.variance)) for rv in report.rolling}
    windows = sorted(by_window)
    all_dates = sorted({d for rv in report.rolling for d in rv.dates})
    with vol_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date"] + [f"var_{w}" for w in windows])
        for d in all_dates:
            row = [d.isoformat()]
            for w in windows:
                value = by_window[w].get(d)
                row.append("" if value is None else f"{value:.10g}")
            writer.writerow(row)
    paths["rolling_volatility"] = vol_path
    return paths


def render_report_json(report: FullReport) -> bytes:
    """Deterministic byte rendering of the machine-readable report."""
    return (json.dumps(report.as_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n").encode(
        "utf-8"
    )
