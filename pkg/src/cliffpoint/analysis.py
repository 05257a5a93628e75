"""Degradation metrics, region statistics, and significance testing.

Everything here is a pure function of its inputs.  Permutation tests take an
explicit seed, so p-values are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DegradationConfig, PerformanceSeries, require_nonempty
from .detection import detect_threshold
from .errors import (
    DegenerateStatisticsError,
    InsufficientDataError,
    InvalidConfigError,
    UndefinedCorrelationError,
)

__all__ = [
    "CliffClassification",
    "RegionStats",
    "RegionReport",
    "TestResult",
    "CorrelationResult",
    "SensitivityReport",
    "degradation_rate",
    "classify_cliff",
    "region_stats",
    "region_report",
    "two_sample_test",
    "region_correlation",
    "sensitivity_sweep",
    "SWEEPABLE_PARAMETERS",
]

SWEEPABLE_PARAMETERS = ("peak_window", "rise_range_width", "rebound_threshold")

# Names used when the boundaries carve out the canonical three regions.
_THREE_REGION_NAMES = ("stable", "transition", "degraded")


def degradation_rate(i_at: float, i_next: float) -> float:
    """Fractional performance loss from i_at to i_next.

    Negative when performance improves.  Undefined at i_at = 0.
    """
    if i_at == 0:
        raise ZeroDivisionError("degradation rate is undefined when starting performance is 0")
    return (i_at - i_next) / i_at


@dataclass(frozen=True)
class CliffClassification:
    """Verdict and evidence for cliff-like degradation at a threshold."""

    is_cliff: bool
    threshold_ratio: float
    rate: float  # near-window degradation rate across the threshold
    theta: float
    near_pre_mean: float
    near_post_mean: float
    pre_mean: float  # mean over all points below the threshold
    post_mean: float  # mean over all points above it
    halved: bool  # post_mean < 0.5 * pre_mean
    n_pre: int
    n_post: int

    def to_dict(self) -> dict:
        return {
            "is_cliff": self.is_cliff,
            "threshold_ratio": self.threshold_ratio,
            "rate": self.rate,
            "theta": self.theta,
            "near_pre_mean": self.near_pre_mean,
            "near_post_mean": self.near_post_mean,
            "pre_mean": self.pre_mean,
            "post_mean": self.post_mean,
            "halved": self.halved,
            "n_pre": self.n_pre,
            "n_post": self.n_post,
        }


def classify_cliff(
    series: PerformanceSeries,
    threshold_ratio: float,
    cfg: DegradationConfig | None = None,
) -> CliffClassification:
    """Decide whether the drop at threshold_ratio is a cliff.

    Two conditions must both hold: the degradation rate between the side
    means taken over the drop_window points nearest the threshold exceeds
    cliff_theta, and the overall mean above the threshold is below half the
    overall mean below it.  Both sides are strict, so a point exactly at the
    threshold belongs to neither.
    """
    cfg = cfg or DegradationConfig()
    require_nonempty(series)
    r, p = series.ratios, series.performances
    below = p[r < threshold_ratio]
    above = p[r > threshold_ratio]
    if len(below) == 0 or len(above) == 0:
        raise InsufficientDataError(
            f"classify_cliff needs points on both sides of {threshold_ratio}"
        )
    near_pre = float(below[-cfg.drop_window :].mean())
    near_post = float(above[: cfg.drop_window].mean())
    rate = degradation_rate(near_pre, near_post)
    pre_mean = float(below.mean())
    post_mean = float(above.mean())
    halved = post_mean < 0.5 * pre_mean
    return CliffClassification(
        is_cliff=bool(rate > cfg.cliff_theta and halved),
        threshold_ratio=threshold_ratio,
        rate=rate,
        theta=cfg.cliff_theta,
        near_pre_mean=near_pre,
        near_post_mean=near_post,
        pre_mean=pre_mean,
        post_mean=post_mean,
        halved=halved,
        n_pre=int(len(below)),
        n_post=int(len(above)),
    )


@dataclass(frozen=True)
class RegionStats:
    """Descriptive statistics for one ratio region."""

    name: str
    lo: float
    hi: float
    closed: bool  # whether hi is included (true only for the last region)
    n: int
    mean: float | None
    std: float | None  # sample std; None below two points
    minimum: float | None
    maximum: float | None
    r: float | None = None
    r_p: float | None = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lo": self.lo,
            "hi": self.hi,
            "closed": self.closed,
            "n": self.n,
            "mean": self.mean,
            "std": self.std,
            "min": self.minimum,
            "max": self.maximum,
            "r": self.r,
            "r_p": self.r_p,
        }


@dataclass(frozen=True)
class RegionReport:
    """Region statistics plus the stable-vs-degraded contrast."""

    regions: tuple[RegionStats, ...]
    t: float | None
    p: float | None
    cohens_d: float | None
    permutations: int

    def to_dict(self) -> dict:
        return {
            "regions": [s.to_dict() for s in self.regions],
            "stable_vs_degraded": {
                "t": self.t,
                "p": self.p,
                "cohens_d": self.cohens_d,
                "permutations": self.permutations,
            },
        }


def _region_bounds(boundaries: list[float]) -> list[tuple[float, float, bool]]:
    if not boundaries or sorted(boundaries) != list(boundaries):
        raise InvalidConfigError("region boundaries must be a nonempty sorted list")
    if boundaries[0] <= 0:
        raise InvalidConfigError("region boundaries must start above 0")
    edges = [0.0, *boundaries]
    out = []
    for k in range(len(boundaries)):
        out.append((edges[k], edges[k + 1], k == len(boundaries) - 1))
    return out


def _region_masks(
    series: PerformanceSeries, boundaries: list[float]
) -> list[tuple[str, float, float, bool, np.ndarray]]:
    bounds = _region_bounds(boundaries)
    names = (
        _THREE_REGION_NAMES
        if len(bounds) == 3
        else tuple(f"region_{k + 1}" for k in range(len(bounds)))
    )
    r = series.ratios
    out = []
    for name, (lo, hi, closed) in zip(names, bounds):
        mask = (r >= lo) & ((r <= hi) if closed else (r < hi))
        out.append((name, lo, hi, closed, mask))
    return out


def region_stats(
    series: PerformanceSeries, boundaries: list[float] | None = None
) -> tuple[RegionStats, ...]:
    """Per-region n, mean, sample std, min, max.

    Boundaries split [0, b_last] into len(boundaries) regions, half-open
    except the last.  An empty region keeps n = 0 with the stats absent.
    """
    require_nonempty(series)
    if boundaries is None:
        boundaries = list(DegradationConfig().region_boundaries)
    p = series.performances
    out = []
    for name, lo, hi, closed, mask in _region_masks(series, boundaries):
        vals = p[mask]
        n = int(len(vals))
        out.append(
            RegionStats(
                name,
                lo,
                hi,
                closed,
                n,
                float(vals.mean()) if n else None,
                float(vals.std(ddof=1)) if n > 1 else None,
                float(vals.min()) if n else None,
                float(vals.max()) if n else None,
            )
        )
    return tuple(out)


@dataclass(frozen=True)
class TestResult:
    """Two-sample comparison: Welch t, permutation p, Cohen's d."""

    t: float
    p: float
    cohens_d: float
    permutations: int

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "p": self.p,
            "cohens_d": self.cohens_d,
            "permutations": self.permutations,
        }


def _welch_t(
    m1: np.ndarray, v1: np.ndarray, n1: int, m2: np.ndarray, v2: np.ndarray, n2: int
) -> np.ndarray:
    diff = m1 - m2
    denom = np.sqrt(v1 / n1 + v2 / n2)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(denom > 0, diff / np.where(denom > 0, denom, 1.0), 0.0)
    # zero spread with a real difference is an infinite standardized effect
    return np.where((denom == 0) & (diff != 0), np.inf, t)


def two_sample_test(
    a: list[float] | np.ndarray,
    b: list[float] | np.ndarray,
    permutations: int = 10_000,
    seed: int = 0,
) -> TestResult:
    """Welch t statistic, seeded permutation p, and pooled-std Cohen's d.

    The p-value counts permutations whose |t| reaches the observed one, with
    the +1 correction, so its floor is 1/(permutations + 1).  Two identical
    constant samples give t = 0, d = 0; constant samples at different levels
    have no finite standardized effect and raise.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise InsufficientDataError("two_sample_test needs at least two points per sample")
    v1, v2 = float(a.var(ddof=1)), float(b.var(ddof=1))
    m1, m2 = float(a.mean()), float(b.mean())
    pooled = math.sqrt(((n1 - 1) * v1 + (n2 - 1) * v2) / (n1 + n2 - 2))
    if pooled == 0.0:
        if m1 == m2:
            return TestResult(0.0, 1.0, 0.0, permutations)
        raise DegenerateStatisticsError(
            "zero pooled standard deviation with unequal means"
        )
    d = (m1 - m2) / pooled
    t_obs = float(_welch_t(np.array(m1), np.array(v1), n1, np.array(m2), np.array(v2), n2))

    pool = np.concatenate([a, b])
    rng = np.random.Generator(np.random.PCG64(seed))
    mat = np.tile(pool, (permutations, 1))
    rng.permuted(mat, axis=1, out=mat)
    pa, pb = mat[:, :n1], mat[:, n1:]
    t_perm = _welch_t(
        pa.mean(axis=1), pa.var(ddof=1, axis=1), n1,
        pb.mean(axis=1), pb.var(ddof=1, axis=1), n2,
    )
    count = int((np.abs(t_perm) >= abs(t_obs)).sum())
    p = (count + 1) / (permutations + 1)
    return TestResult(t_obs, p, d, permutations)


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    p: float
    n: int
    permutations: int

    def to_dict(self) -> dict:
        return {"r": self.r, "p": self.p, "n": self.n, "permutations": self.permutations}


def _pearson_r(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc)) * math.sqrt(float(yc @ yc))
    if denom == 0.0:
        raise UndefinedCorrelationError("zero variance in a coordinate")
    return float(xc @ yc / denom)


def region_correlation(
    series: PerformanceSeries,
    lo: float,
    hi: float,
    closed: bool = True,
    permutations: int = 10_000,
    seed: int = 0,
) -> CorrelationResult:
    """Pearson r between ratio and performance inside [lo, hi].

    Set closed=False to exclude the upper bound.  The two-sided p-value comes
    from permuting the performance labels within the region.
    """
    require_nonempty(series)
    r, p = series.ratios, series.performances
    mask = (r >= lo) & ((r <= hi) if closed else (r < hi))
    x, y = r[mask], p[mask]
    if len(x) < 3:
        raise InsufficientDataError(
            f"region [{lo}, {hi}] has {len(x)} points; need at least 3"
        )
    r_obs = _pearson_r(x, y)

    rng = np.random.Generator(np.random.PCG64(seed))
    mat = np.tile(y, (permutations, 1))
    rng.permuted(mat, axis=1, out=mat)
    xc = x - x.mean()
    norm_x = math.sqrt(float(xc @ xc))
    yc = mat - mat.mean(axis=1, keepdims=True)
    denom = norm_x * np.sqrt((yc**2).sum(axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        r_perm = np.where(denom > 0, (yc @ xc) / np.where(denom > 0, denom, 1.0), 0.0)
    count = int((np.abs(r_perm) >= abs(r_obs)).sum())
    p_val = (count + 1) / (permutations + 1)
    return CorrelationResult(r_obs, p_val, int(len(x)), permutations)


def region_report(
    series: PerformanceSeries,
    boundaries: list[float] | None = None,
    permutations: int = 10_000,
    seed: int = 0,
) -> RegionReport:
    """Region statistics, per-region correlations, and the first-vs-last
    region comparison.  Contrasts that lack data or are degenerate are left
    absent instead of raising."""
    if boundaries is None:
        boundaries = list(DegradationConfig().region_boundaries)
    stats = list(region_stats(series, boundaries))
    p = series.performances
    masks = _region_masks(series, boundaries)
    enriched = []
    for st, (_, lo, hi, closed, mask) in zip(stats, masks):
        r_val = p_val = None
        if st.n >= 3:
            try:
                corr = region_correlation(
                    series, lo, hi, closed=closed, permutations=permutations, seed=seed
                )
                r_val, p_val = corr.r, corr.p
            except UndefinedCorrelationError:
                pass
        enriched.append(
            RegionStats(
                st.name, st.lo, st.hi, st.closed, st.n,
                st.mean, st.std, st.minimum, st.maximum, r_val, p_val,
            )
        )
    first = p[masks[0][4]]
    last = p[masks[-1][4]]
    t = p_val = d = None
    if len(first) >= 2 and len(last) >= 2:
        try:
            res = two_sample_test(first, last, permutations=permutations, seed=seed)
            t, p_val, d = res.t, res.p, res.cohens_d
        except DegenerateStatisticsError:
            pass
    return RegionReport(tuple(enriched), t, p_val, d, permutations)


@dataclass(frozen=True)
class SensitivityReport:
    """How the cross-validated threshold moves as one parameter sweeps."""

    parameter: str
    grid: tuple[float, ...]
    thresholds: tuple[float | None, ...]
    default_threshold: float | None
    max_deviation: float | None

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "grid": list(self.grid),
            "thresholds": list(self.thresholds),
            "default_threshold": self.default_threshold,
            "max_deviation": self.max_deviation,
        }


def sensitivity_sweep(
    series: PerformanceSeries,
    cfg: DegradationConfig,
    parameter: str,
    grid: list,
) -> SensitivityReport:
    """Rerun the full five-method pipeline for each grid value of one
    detection parameter and report the threshold movement."""
    if parameter not in SWEEPABLE_PARAMETERS:
        raise InvalidConfigError(
            f"parameter must be one of {SWEEPABLE_PARAMETERS}, got {parameter!r}"
        )
    if not grid:
        raise InvalidConfigError("sweep grid must be nonempty")
    default = detect_threshold(series, cfg).final_threshold
    thresholds = []
    for value in grid:
        swept = cfg.with_overrides(**{parameter: value})
        thresholds.append(detect_threshold(series, swept).final_threshold)
    deviations = [
        abs(v - default) for v in thresholds if v is not None and default is not None
    ]
    return SensitivityReport(
        parameter,
        tuple(grid),
        tuple(thresholds),
        default,
        max(deviations) if deviations else None,
    )
