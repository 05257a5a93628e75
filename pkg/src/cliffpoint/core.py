"""Core data types and numeric helpers.

A performance series pairs a context-utilization ratio (tokens used divided
by the model's context capacity) with a task score in [0, 1].  Everything
downstream, detection, region statistics, and reporting, consumes the
preprocessed form produced by :func:`preprocess`: scores of exactly 0 or 1
dropped, points sorted by ratio, duplicate ratios merged by mean.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateRegressionError,
    EmptySeriesError,
    InvalidConfigError,
)

__all__ = [
    "SampleRecord",
    "PerformanceSeries",
    "DegradationConfig",
    "compute_ratio",
    "preprocess",
    "moving_average",
    "linear_slope",
    "max_consecutive_rises",
]


@dataclass(frozen=True)
class SampleRecord:
    """One evaluated sample before it becomes a series point."""

    id: str
    token_count: int | None = None
    ratio: float | None = None
    performance: float | None = None
    prediction: str | None = None
    reference: str | None = None


@dataclass(frozen=True)
class PerformanceSeries:
    """Ratio/performance pairs plus a provenance note of how they were derived."""

    ratios: np.ndarray
    performances: np.ndarray
    provenance: str = ""

    def __post_init__(self) -> None:
        r = np.asarray(self.ratios, dtype=float)
        p = np.asarray(self.performances, dtype=float)
        if r.ndim != 1 or p.ndim != 1 or len(r) != len(p):
            raise InvalidConfigError("ratios and performances must be 1-d arrays of equal length")
        if len(r) and (r < 0).any():
            raise InvalidConfigError("ratios must be non-negative")
        if len(p) and ((p < 0).any() or (p > 1).any()):
            raise InvalidConfigError("performances must lie in [0, 1]")
        object.__setattr__(self, "ratios", r)
        object.__setattr__(self, "performances", p)

    def __len__(self) -> int:
        return len(self.ratios)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.ratios.tolist(), self.performances.tolist()))

    @classmethod
    def from_points(
        cls, points: Iterable[tuple[float, float]], provenance: str = ""
    ) -> "PerformanceSeries":
        pts = list(points)
        r = np.array([a for a, _ in pts], dtype=float)
        p = np.array([b for _, b in pts], dtype=float)
        return cls(r, p, provenance)

    def is_preprocessed(self) -> bool:
        """True when ratios are strictly increasing and no score is exactly 0 or 1."""
        r, p = self.ratios, self.performances
        if len(r) == 0:
            return True
        strictly_sorted = bool((np.diff(r) > 0).all()) if len(r) > 1 else True
        interior = bool(((p > 0) & (p < 1)).all())
        return strictly_sorted and interior


@dataclass(frozen=True)
class DegradationConfig:
    """Tunable parameters for threshold detection and downstream analysis.

    Defaults are the calibrated operating point; every field is exposed as a
    CLI flag and as a config-file key.
    """

    t_max: int = 131072
    peak_window: int = 5
    min_peak_height: float = 0.3
    peak_range: tuple[float, float] = (0.30, 0.60)
    rise_range_width: float = 0.10
    rebound_threshold: float = 0.85
    post_min: int = 10
    post_max: int = 50
    drop_window: int = 30
    consecutive_rise_run: int = 3
    n_bins: int = 20
    bin_search_range: tuple[float, float] = (0.35, 0.55)
    bin_drop_min: float = 0.05
    percentile_cut: float = 0.90
    ma_window: int = 5
    cliff_theta: float = 0.30
    region_boundaries: tuple[float, ...] = (0.40, 0.50, 0.95)
    trend_window: int = 50

    def __post_init__(self) -> None:
        if self.t_max <= 0:
            raise InvalidConfigError("t_max must be a positive token count")
        for name in ("peak_window", "post_min", "post_max", "drop_window",
                     "consecutive_rise_run", "n_bins", "ma_window", "trend_window"):
            if int(getattr(self, name)) < 1:
                raise InvalidConfigError(f"{name} must be >= 1")
        if not 0 < self.min_peak_height < 1:
            raise InvalidConfigError("min_peak_height must lie in (0, 1)")
        lo, hi = self.peak_range
        if not (0 <= lo < hi <= 1):
            raise InvalidConfigError("peak_range must satisfy 0 <= lo < hi <= 1")
        blo, bhi = self.bin_search_range
        if not (0 <= blo < bhi <= 1):
            raise InvalidConfigError("bin_search_range must satisfy 0 <= lo < hi <= 1")
        if not 0 < self.rise_range_width <= 1:
            raise InvalidConfigError("rise_range_width must lie in (0, 1]")
        if not 0 < self.rebound_threshold < 1:
            raise InvalidConfigError("rebound_threshold must lie in (0, 1)")
        if not 0 < self.bin_drop_min < 1:
            raise InvalidConfigError("bin_drop_min must lie in (0, 1)")
        if not 0 < self.percentile_cut < 1:
            raise InvalidConfigError("percentile_cut must lie in (0, 1)")
        if not 0 < self.cliff_theta < 1:
            raise InvalidConfigError("cliff_theta must lie in (0, 1)")
        if self.post_min > self.post_max:
            raise InvalidConfigError("post_min cannot exceed post_max")
        bounds = tuple(float(b) for b in self.region_boundaries)
        if len(bounds) < 1 or any(b <= 0 or b > 1 for b in bounds) or list(bounds) != sorted(set(bounds)):
            raise InvalidConfigError("region_boundaries must be strictly increasing values in (0, 1]")
        object.__setattr__(self, "region_boundaries", bounds)
        object.__setattr__(self, "peak_range", (float(lo), float(hi)))
        object.__setattr__(self, "bin_search_range", (float(blo), float(bhi)))

    def with_overrides(self, **kwargs) -> "DegradationConfig":
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


def compute_ratio(token_count: int, t_max: int) -> float:
    """Context-utilization ratio token_count / t_max, floored at zero.

    Values above 1 are legal and mean the sample exceeded the nominal
    capacity.
    """
    if t_max <= 0:
        raise InvalidConfigError("t_max must be positive to derive a ratio")
    return max(0.0, token_count / t_max)


def preprocess(series: PerformanceSeries) -> PerformanceSeries:
    """Canonicalize a raw series for detection.

    Drops points whose performance is exactly 0 or exactly 1 (degenerate
    scores carry no gradient information), sorts by ratio, and merges points
    sharing a ratio by averaging their performances.  The counts of removed
    and merged points are appended to the provenance string.  Points with
    ratio above 1 are kept but counted so reports can flag them.  The result
    may be empty; consumers that need data raise EmptySeriesError themselves.
    """
    r = series.ratios
    p = series.performances
    keep = (p != 0.0) & (p != 1.0)
    removed = int(len(p) - keep.sum())
    r, p = r[keep], p[keep]

    order = np.argsort(r, kind="stable")
    r, p = r[order], p[order]

    merged = 0
    if len(r):
        uniq, inverse, counts = np.unique(r, return_inverse=True, return_counts=True)
        if len(uniq) != len(r):
            sums = np.zeros(len(uniq))
            np.add.at(sums, inverse, p)
            p = sums / counts
            r = uniq
            merged = int((counts > 1).sum())

    over = int((r > 1.0).sum())
    note = f"preprocess(removed={removed},merged={merged},over_ratio={over})"
    provenance = f"{series.provenance}|{note}" if series.provenance else note
    return PerformanceSeries(r, p, provenance)


def moving_average(values: Sequence[float], window: int) -> np.ndarray:
    """Trailing moving average whose window shrinks at the left edge.

    Output has the same length as the input; element i averages the last
    `window` values ending at i (fewer near the start).
    """
    if window < 1:
        raise InvalidConfigError("window must be >= 1")
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return v.copy()
    c = np.cumsum(v)
    out = np.empty_like(v)
    for i in range(len(v)):
        lo = max(0, i - window + 1)
        total = c[i] - (c[lo - 1] if lo > 0 else 0.0)
        out[i] = total / (i - lo + 1)
    return out


def linear_slope(points: Sequence[tuple[float, float]]) -> float:
    """Ordinary least squares slope of y on x."""
    pts = list(points)
    if len(pts) < 2:
        raise DegenerateRegressionError("slope needs at least two points")
    x = np.array([a for a, _ in pts], dtype=float)
    y = np.array([b for _, b in pts], dtype=float)
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        raise DegenerateRegressionError("slope undefined for zero x-variance")
    return float(xc @ (y - y.mean()) / denom)


def max_consecutive_rises(values: Sequence[float]) -> int:
    """Length of the longest run of strictly positive successive differences."""
    best = cur = 0
    v = list(values)
    for a, b in zip(v, v[1:]):
        cur = cur + 1 if b > a else 0
        if cur > best:
            best = cur
    return best


def require_nonempty(series: PerformanceSeries, what: str = "series") -> None:
    """Raise EmptySeriesError when a consumer needs at least one point."""
    if len(series) == 0:
        raise EmptySeriesError(f"{what} has no points after preprocessing")
