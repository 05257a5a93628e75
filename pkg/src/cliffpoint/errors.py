"""Exception hierarchy shared across the package."""

from __future__ import annotations


class CliffPointError(Exception):
    """Base class for all errors raised by this package."""


class InvalidConfigError(CliffPointError):
    """A configuration value is outside its documented domain."""


class EmptySeriesError(CliffPointError):
    """An operation that needs data received a series with no points."""


class InsufficientDataError(CliffPointError):
    """There are points, but too few for the requested computation."""


class DegenerateRegressionError(CliffPointError):
    """A regression was requested on fewer than two points or zero x-variance."""


class InvalidReferenceError(CliffPointError):
    """A reference text normalized to the empty string."""


class InvalidInputError(CliffPointError):
    """An argument fails a structural precondition (wrong count, all absent)."""


class DegenerateStatisticsError(CliffPointError):
    """Group means differ but the pooled spread is zero, so the effect size is undefined."""


class UndefinedCorrelationError(CliffPointError):
    """Correlation was requested on data with zero variance in a coordinate."""


class InvalidMatrixError(CliffPointError):
    """An attention matrix is not square, non-negative, and row-stochastic."""


class IngestError(CliffPointError):
    """A record file is malformed or a record cannot be resolved."""
