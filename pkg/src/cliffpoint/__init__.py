"""Cliff-like degradation threshold detection for long-context evaluations.

Data model and preprocessing live in core, text scoring in scoring, the
five-method detector in detection, statistics in analysis, theoretical
predictors in theory, the synthetic oracle in synth, file ingestion in
ingest, and report assembly in report.  The cli module exposes all of it as
subcommands.
"""

from __future__ import annotations

from ._version import __version__
from .analysis import (
    CliffClassification,
    CorrelationResult,
    RegionReport,
    RegionStats,
    SensitivityReport,
    TestResult,
    classify_cliff,
    degradation_rate,
    region_correlation,
    region_report,
    region_stats,
    sensitivity_sweep,
    two_sample_test,
)
from .core import (
    DegradationConfig,
    PerformanceSeries,
    SampleRecord,
    compute_ratio,
    linear_slope,
    max_consecutive_rises,
    moving_average,
    preprocess,
)
from .detection import (
    CrossValidationResult,
    PeakCandidate,
    PeakVerdict,
    ThresholdEstimate,
    cross_validate,
    detect_threshold,
    method_binned,
    method_gradient,
    method_percentile,
    method_second_derivative,
    method_sliding_window,
    run_all_methods,
)
from .errors import (
    CliffPointError,
    DegenerateRegressionError,
    DegenerateStatisticsError,
    EmptySeriesError,
    IngestError,
    InsufficientDataError,
    InvalidConfigError,
    InvalidInputError,
    InvalidMatrixError,
    InvalidReferenceError,
    UndefinedCorrelationError,
)
from .ingest import ingest_records, read_records, resolve_records
from .report import RunReport, run_detect
from .scoring import F1Breakdown, dual_f1, normalize_text
from .synth import OracleRecord, SynthConfig, SynthTruth, generate_series, oracle_score
from .theory import (
    AttentionMatrix,
    RopeParams,
    UnifiedPrediction,
    attention_concentration,
    attention_entropy,
    rope_period,
    rope_threshold,
    unified_threshold,
)

__all__ = [
    "__version__",
    "AttentionMatrix",
    "CliffClassification",
    "CliffPointError",
    "CorrelationResult",
    "CrossValidationResult",
    "DegenerateRegressionError",
    "DegenerateStatisticsError",
    "DegradationConfig",
    "EmptySeriesError",
    "F1Breakdown",
    "IngestError",
    "InsufficientDataError",
    "InvalidConfigError",
    "InvalidInputError",
    "InvalidMatrixError",
    "InvalidReferenceError",
    "OracleRecord",
    "PeakCandidate",
    "PeakVerdict",
    "PerformanceSeries",
    "RegionReport",
    "RegionStats",
    "RopeParams",
    "RunReport",
    "SampleRecord",
    "SensitivityReport",
    "SynthConfig",
    "SynthTruth",
    "TestResult",
    "ThresholdEstimate",
    "UndefinedCorrelationError",
    "UnifiedPrediction",
    "attention_concentration",
    "attention_entropy",
    "classify_cliff",
    "compute_ratio",
    "cross_validate",
    "degradation_rate",
    "detect_threshold",
    "dual_f1",
    "generate_series",
    "ingest_records",
    "linear_slope",
    "max_consecutive_rises",
    "method_binned",
    "method_gradient",
    "method_percentile",
    "method_second_derivative",
    "method_sliding_window",
    "moving_average",
    "normalize_text",
    "oracle_score",
    "preprocess",
    "read_records",
    "region_correlation",
    "region_report",
    "region_stats",
    "resolve_records",
    "run_all_methods",
    "run_detect",
    "sensitivity_sweep",
    "two_sample_test",
    "unified_threshold",
]
