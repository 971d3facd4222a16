"""Robust non-parametric event-window analysis for daily time series."""

from .anomaly import (
    AnomalyVerdict,
    FeatureMatrix,
    build_features,
    detect_segment,
    ensemble,
    iqr_detector,
    isolation_forest,
    one_class_svm,
)
from .descriptive import (
    DensityEstimate,
    DescriptiveSummary,
    LMomentSummary,
    kde,
    l_moments,
    summarize,
    trimmed_mean,
)
from .normality import BatteryVerdict, NormalityResult, NormalityTest, battery
from .nptests import (
    TwoSampleOutcome,
    TwoSampleTest,
    brown_forsythe,
    cliffs_delta,
    ks_two_sample,
    mann_whitney_u,
)
from .report import FullReport, RunConfig, run_full, write_outputs
from .resample import (
    BootstrapPlan,
    BootstrapSummary,
    ResamplingScheme,
    bootstrap_test,
    percentile_ci,
    resample_pair,
)
from .series import (
    CsvProvider,
    ObservationSeries,
    ReturnSeries,
    SegmentedSeries,
    load_csv,
    log_returns,
    modified_z_flags,
    save_csv,
    segment,
)
from .volatility import RollingVolatility, VarianceComparison, rolling_variance, variance_ratio

__version__ = "0.1.0"
