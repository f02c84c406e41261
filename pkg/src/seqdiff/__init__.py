"""Bootstrap regression two-sample test for dependent labeled sequences."""

__version__ = "0.1.0"

from .core import DataError, LabeledSeries, Rng, SplitSpec, block_splits, split_series
from .dtest import TestConfig, TestReport, local_test, monte_carlo_pvalue, run_test, test_statistic
from .eventlabel import IntensitySeries, interpolate_labels, label_rapid_events
from .labelmodel import MarkovLabelModel, fit_markov, sample_labels
from .regressors import KernelRegressor, estimate_prior, fit_nw, nw_bandwidth
from .synthgen import SyntheticConfig, generate, hard_threshold, simulate_ar1

__all__ = [
    "DataError", "LabeledSeries", "Rng", "SplitSpec", "block_splits", "split_series",
    "TestConfig", "TestReport", "local_test", "monte_carlo_pvalue", "run_test", "test_statistic",
    "IntensitySeries", "interpolate_labels", "label_rapid_events",
    "MarkovLabelModel", "fit_markov", "sample_labels",
    "KernelRegressor", "estimate_prior", "fit_nw", "nw_bandwidth",
    "SyntheticConfig", "generate", "hard_threshold", "simulate_ar1",
]
