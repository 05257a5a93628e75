"""Multi-method detection of cliff-like degradation thresholds.

Detection runs in three stages.  Stage 1 finds local performance peaks
inside the plausible threshold band.  Stage 2 discards peaks that are
followed, within a short ratio window, by recovery: a value above the peak,
a dip below the rebound level followed by a sustained climb back above it,
or a rising trend while the window still reaches the rebound level.  Stage 3
verifies that the decline after a surviving peak is sustained rather than a
local wobble.  A method reports a detection only when at least one peak
passes all three stages; the best non-sustained candidate is still surfaced
for auditing.

Five methods share this skeleton but differ in candidate generation or
selection; their agreement is summarized by :func:`cross_validate`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DegradationConfig,
    PerformanceSeries,
    max_consecutive_rises,
    moving_average,
    require_nonempty,
)
from .errors import InsufficientDataError, InvalidInputError

__all__ = [
    "PeakCandidate",
    "PeakVerdict",
    "ThresholdEstimate",
    "CrossValidationResult",
    "detect_local_peaks",
    "filter_rise_in_range",
    "verify_sustained_decline",
    "method_gradient",
    "method_second_derivative",
    "method_binned",
    "method_percentile",
    "method_sliding_window",
    "run_all_methods",
    "cross_validate",
    "detect_threshold",
    "METHOD_NAMES",
]

METHOD_NAMES = (
    "gradient",
    "second_derivative",
    "binned",
    "percentile",
    "sliding_window",
)

EXCLUSION_REASONS = ("value_exceeds_peak", "consecutive_rises", "rising_trend")


@dataclass(frozen=True)
class PeakCandidate:
    """A Stage-1 local maximum, flanked by at least peak_window points per side."""

    index: int
    ratio: float
    performance: float


@dataclass(frozen=True)
class PeakVerdict:
    """Audit record of one candidate's path through Stages 2 and 3."""

    candidate: PeakCandidate
    stage2: str  # kept | excluded
    reason: str | None = None  # exclusion reason when stage2 == excluded
    stage3: str | None = None  # sustained | non_sustained | unverifiable
    rebound_fraction: float | None = None
    post_slope: float | None = None
    post_rises: int | None = None
    recovered: bool | None = None
    drop_pct: float | None = None

    def to_dict(self) -> dict:
        return {
            "index": self.candidate.index,
            "ratio": self.candidate.ratio,
            "performance": self.candidate.performance,
            "stage2": self.stage2,
            "reason": self.reason,
            "stage3": self.stage3,
            "rebound_fraction": self.rebound_fraction,
            "post_slope": self.post_slope,
            "post_rises": self.post_rises,
            "recovered": self.recovered,
            "drop_pct": self.drop_pct,
        }


@dataclass(frozen=True)
class ThresholdEstimate:
    """One method's answer: did it find a threshold, and where."""

    method: str
    detected: bool
    threshold_ratio: float | None
    drop_pct: float | None
    selected_peak: PeakVerdict | None
    audit: tuple[PeakVerdict, ...]
    reason: str | None = None  # populated when detected is False

    def to_dict(self, with_audit: bool = True) -> dict:
        out = {
            "method": self.method,
            "detected": self.detected,
            "threshold_ratio": self.threshold_ratio,
            "drop_pct": self.drop_pct,
            "reason": self.reason,
            "selected_peak": self.selected_peak.to_dict() if self.selected_peak else None,
        }
        if with_audit:
            out["audit"] = [v.to_dict() for v in self.audit]
        return out


@dataclass(frozen=True)
class CrossValidationResult:
    """Aggregate of the five method estimates."""

    detected: bool
    final_threshold: float | None
    mean: float | None
    std: float | None  # sample standard deviation, the canonical spread
    std_population: float | None
    minimum: float | None
    maximum: float | None
    consistency: str | None  # high | medium | low
    confidence: str | None  # high | medium | low
    coverage: float
    per_method: tuple[ThresholdEstimate, ...]
    all_candidates: tuple[PeakVerdict, ...]

    def to_dict(self, with_audit: bool = True) -> dict:
        return {
            "detected": self.detected,
            "final_threshold": self.final_threshold,
            "mean": self.mean,
            "std": self.std,
            "std_population": self.std_population,
            "min": self.minimum,
            "max": self.maximum,
            "consistency": self.consistency,
            "confidence": self.confidence,
            "coverage": self.coverage,
            "methods": [e.to_dict(with_audit) for e in self.per_method],
        }


def _require_ready(series: PerformanceSeries) -> None:
    require_nonempty(series)
    if not series.is_preprocessed():
        raise InvalidInputError("series must be preprocessed before detection")


def _ols_slope(x: np.ndarray, y: np.ndarray) -> float | None:
    if len(x) < 2:
        return None
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        return None
    return float(xc @ (y - y.mean()) / denom)


def _has_recovery_run(values: np.ndarray, level: float, run: int) -> bool:
    """True when values dip below `level` and a run of at least `run`
    consecutive rises then ends at or above it.

    The run may start below the level (the climb out of the dip counts), but
    a climb that never crossed below the level is a continuing plateau, not a
    recovery, and does not fire.
    """
    dipped = False
    cur = 0
    prev = None
    for v in values:
        cur = cur + 1 if (prev is not None and v > prev) else 0
        if v < level:
            dipped = True
        elif dipped and cur >= run:
            return True
        prev = v
    return False


def detect_local_peaks(
    series: PerformanceSeries, cfg: DegradationConfig
) -> list[PeakCandidate]:
    """Stage 1: local maxima within the peak band.

    A point qualifies when its ratio lies in cfg.peak_range (bounds
    inclusive), its performance reaches cfg.min_peak_height, and it is at
    least as high as every one of its peak_window neighbors on each side.
    Ties count, so plateau points qualify.  Needs 2 * peak_window + 1 points.
    """
    _require_ready(series)
    w = cfg.peak_window
    r, p = series.ratios, series.performances
    n = len(r)
    if n < 2 * w + 1:
        raise InsufficientDataError(
            f"need at least {2 * w + 1} points for peak_window={w}, got {n}"
        )
    lo, hi = cfg.peak_range
    out = []
    for i in range(w, n - w):
        if not (lo <= r[i] <= hi):
            continue
        if p[i] < cfg.min_peak_height:
            continue
        if p[i] >= p[i - w : i].max() and p[i] >= p[i + 1 : i + 1 + w].max():
            out.append(PeakCandidate(i, float(r[i]), float(p[i])))
    return out


def filter_rise_in_range(
    series: PerformanceSeries,
    peaks: list[PeakCandidate],
    cfg: DegradationConfig,
) -> tuple[list[PeakCandidate], list[PeakVerdict]]:
    """Stage 2: drop peaks whose following window shows recovery.

    The window holds the points with ratio in (peak, peak + rise_range_width].
    Checks run in a fixed order and the first failure is recorded:
    value_exceeds_peak, then consecutive_rises, then rising_trend.  A peak
    with an empty window is kept.
    """
    r, p = series.ratios, series.performances
    kept: list[PeakCandidate] = []
    excluded: list[PeakVerdict] = []
    for peak in peaks:
        j0 = int(np.searchsorted(r, peak.ratio, side="right"))
        j1 = int(np.searchsorted(r, peak.ratio + cfg.rise_range_width, side="right"))
        window = p[j0:j1]
        reason = None
        if len(window):
            level = cfg.rebound_threshold * peak.performance
            if (window > peak.performance).any():
                reason = "value_exceeds_peak"
            elif _has_recovery_run(window, level, cfg.consecutive_rise_run):
                reason = "consecutive_rises"
            elif window.max() > level:
                slope = _ols_slope(r[j0:j1], window)
                if slope is not None and slope > 0:
                    reason = "rising_trend"
        if reason is None:
            kept.append(peak)
        else:
            excluded.append(PeakVerdict(peak, "excluded", reason=reason))
    return kept, excluded


def verify_sustained_decline(
    series: PerformanceSeries, peak: PeakCandidate, cfg: DegradationConfig
) -> PeakVerdict:
    """Stage 3: grade the decline after a kept peak.

    Examines up to post_max points after the peak.  With fewer than post_min
    the verdict is unverifiable and the drop is computed over what exists.
    The decline is sustained when performance past the drop window never
    returns to rebound_threshold of the peak, the post-peak trend slopes
    down, and no recovery climb (dip below the rebound level, then
    consecutive_rise_run rises back above it) occurs.  drop_pct compares the
    peak with the mean of the first drop_window post-peak points.
    """
    r, p = series.ratios, series.performances
    i = peak.index
    post = p[i + 1 : i + 1 + cfg.post_max]
    post_r = r[i + 1 : i + 1 + cfg.post_max]

    if len(post) == 0:
        return PeakVerdict(peak, "kept", stage3="unverifiable", drop_pct=0.0)

    drop_pct = float(
        (peak.performance - post[: cfg.drop_window].mean()) / peak.performance
    )
    if len(post) < cfg.post_min:
        return PeakVerdict(
            peak,
            "kept",
            stage3="unverifiable",
            rebound_fraction=float(post.max() / peak.performance),
            post_slope=_ols_slope(post_r, post),
            post_rises=max_consecutive_rises(post),
            drop_pct=drop_pct,
        )

    # Rebound is judged past the drop window so the transition itself cannot
    # mask a genuine collapse; short windows fall back to the whole post.
    tail = post[cfg.drop_window :]
    rebound_src = tail if len(tail) else post
    rebound = float(rebound_src.max() / peak.performance)
    slope = _ols_slope(post_r, post)
    level = cfg.rebound_threshold * peak.performance
    recovered = _has_recovery_run(post, level, cfg.consecutive_rise_run)
    sustained = (
        rebound < cfg.rebound_threshold
        and slope is not None
        and slope < 0
        and not recovered
    )
    return PeakVerdict(
        peak,
        "kept",
        stage3="sustained" if sustained else "non_sustained",
        rebound_fraction=rebound,
        post_slope=slope,
        post_rises=max_consecutive_rises(post),
        recovered=recovered,
        drop_pct=drop_pct,
    )


def _staged_verdicts(
    series: PerformanceSeries,
    cfg: DegradationConfig,
    peaks: list[PeakCandidate],
) -> list[PeakVerdict]:
    kept, excluded = filter_rise_in_range(series, peaks, cfg)
    verdicts = list(excluded)
    verdicts.extend(verify_sustained_decline(series, peak, cfg) for peak in kept)
    verdicts.sort(key=lambda v: v.candidate.index)
    return verdicts


def _select(
    method: str,
    verdicts: list[PeakVerdict],
    sustained_key=None,
) -> ThresholdEstimate:
    """Pick the winning peak: best sustained one, by drop size unless a
    method-specific key is given.  Without a sustained peak the estimate is
    undetected but still names the strongest remaining candidate."""
    audit = tuple(verdicts)
    sustained = [v for v in verdicts if v.stage3 == "sustained"]
    remaining = [v for v in verdicts if v.stage3 in ("non_sustained", "unverifiable")]
    if sustained:
        if sustained_key is None:
            best = max(sustained, key=lambda v: (v.drop_pct, -v.candidate.index))
        else:
            best = min(sustained, key=sustained_key)
        return ThresholdEstimate(
            method, True, best.candidate.ratio, best.drop_pct, best, audit
        )
    if remaining:
        best = max(remaining, key=lambda v: (v.drop_pct, -v.candidate.index))
        return ThresholdEstimate(
            method,
            False,
            best.candidate.ratio,
            best.drop_pct,
            best,
            audit,
            reason="no_sustained_decline",
        )
    reason = "all_peaks_excluded" if verdicts else "no_peaks"
    return ThresholdEstimate(method, False, None, None, None, audit, reason=reason)


def _insufficient(method: str, exc: Exception) -> ThresholdEstimate:
    return ThresholdEstimate(method, False, None, None, None, (), reason=str(exc))


def method_gradient(
    series: PerformanceSeries, cfg: DegradationConfig
) -> ThresholdEstimate:
    """Method 1: full three-stage pipeline on the raw series."""
    try:
        peaks = detect_local_peaks(series, cfg)
    except InsufficientDataError as exc:
        return _insufficient("gradient", exc)
    return _select("gradient", _staged_verdicts(series, cfg, peaks))


def method_second_derivative(
    series: PerformanceSeries, cfg: DegradationConfig
) -> ThresholdEstimate:
    """Method 2: same staging, but sustained peaks are ranked by curvature.

    The winner has the most negative discrete second difference on the
    segment from just before the peak through the first post_min post-peak
    points, so the sharpest bend downward wins; drop size breaks ties.
    """
    try:
        peaks = detect_local_peaks(series, cfg)
    except InsufficientDataError as exc:
        return _insufficient("second_derivative", exc)
    verdicts = _staged_verdicts(series, cfg, peaks)
    p = series.performances

    def curvature(v: PeakVerdict) -> tuple[float, float, int]:
        i = v.candidate.index
        seg = p[max(0, i - 1) : i + 1 + cfg.post_min]
        worst = float(np.diff(seg, n=2).min()) if len(seg) >= 3 else 0.0
        return (worst, -v.drop_pct, v.candidate.index)

    return _select("second_derivative", verdicts, sustained_key=curvature)


def method_binned(
    series: PerformanceSeries, cfg: DegradationConfig
) -> ThresholdEstimate:
    """Method 3: compare equal-width bin means instead of raw points.

    [0, 1] is split into n_bins bins.  Every nonempty bin whose center lies
    in bin_search_range is tried as the peak bin; it qualifies when its mean
    exceeds the mean of the next three nonempty-slot bins by more than
    bin_drop_min, the following level sits below 0.9 of the peak, and no
    single following bin reaches 0.95 of it.  Among qualifying bins the
    highest mean wins (higher center on ties).  The threshold is the bin
    center.
    """
    _require_ready(series)
    r, p = series.ratios, series.performances
    n_bins = cfg.n_bins
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    inside = r <= 1.0
    idx = np.clip(np.searchsorted(edges, r[inside], side="right") - 1, 0, n_bins - 1)
    pin = p[inside]
    means: list[float | None] = [None] * n_bins
    for k in range(n_bins):
        sel = idx == k
        if sel.any():
            means[k] = float(pin[sel].mean())

    lo, hi = cfg.bin_search_range
    best: tuple[float, float, float] | None = None  # (mean, center, drop)
    for k in range(n_bins):
        center = float((edges[k] + edges[k + 1]) / 2)
        if means[k] is None or not (lo <= center <= hi):
            continue
        following = [means[j] for j in range(k + 1, min(k + 4, n_bins)) if means[j] is not None]
        if not following:
            continue
        peak_mean = means[k]
        post_mean = float(np.mean(following))
        drop = (peak_mean - post_mean) / peak_mean
        qualifies = (
            drop > cfg.bin_drop_min
            and post_mean < 0.9 * peak_mean
            and max(following) < 0.95 * peak_mean
        )
        if qualifies and (best is None or (peak_mean, center) > best[:2]):
            best = (peak_mean, center, drop)

    if best is None:
        return ThresholdEstimate(
            "binned", False, None, None, None, (), reason="no_qualifying_bin"
        )
    return ThresholdEstimate("binned", True, best[1], best[2], None, ())


def method_percentile(
    series: PerformanceSeries, cfg: DegradationConfig
) -> ThresholdEstimate:
    """Method 4: gradient staging restricted to top-percentile peaks.

    Stage-1 candidates must reach the percentile_cut quantile (linear
    interpolation) of all performances whose ratio falls in peak_range.
    """
    try:
        peaks = detect_local_peaks(series, cfg)
    except InsufficientDataError as exc:
        return _insufficient("percentile", exc)
    r, p = series.ratios, series.performances
    lo, hi = cfg.peak_range
    region = p[(r >= lo) & (r <= hi)]
    if len(region) == 0:
        return ThresholdEstimate(
            "percentile", False, None, None, None, (), reason="empty_peak_range"
        )
    cut = float(np.quantile(region, cfg.percentile_cut))
    peaks = [peak for peak in peaks if peak.performance >= cut]
    return _select("percentile", _staged_verdicts(series, cfg, peaks))


def method_sliding_window(
    series: PerformanceSeries, cfg: DegradationConfig
) -> ThresholdEstimate:
    """Method 5: gradient staging on a trailing-moving-average smoothed copy.

    The threshold is the ratio at the selected smoothed peak; ratios are
    untouched so indices line up with the raw series.
    """
    _require_ready(series)
    smoothed = PerformanceSeries(
        series.ratios,
        moving_average(series.performances, cfg.ma_window),
        provenance=f"{series.provenance}|ma({cfg.ma_window})",
    )
    try:
        peaks = detect_local_peaks(smoothed, cfg)
    except InsufficientDataError as exc:
        return _insufficient("sliding_window", exc)
    est = _select("sliding_window", _staged_verdicts(smoothed, cfg, peaks))
    return est


def run_all_methods(
    series: PerformanceSeries, cfg: DegradationConfig
) -> list[ThresholdEstimate]:
    """Run the five methods in their canonical order."""
    return [
        method_gradient(series, cfg),
        method_second_derivative(series, cfg),
        method_binned(series, cfg),
        method_percentile(series, cfg),
        method_sliding_window(series, cfg),
    ]


def cross_validate(estimates: list[ThresholdEstimate]) -> CrossValidationResult:
    """Aggregate exactly five method estimates into a final threshold.

    Only detected estimates vote.  The final threshold is their median; the
    sample standard deviation (n - 1 weighting) grades consistency: below
    0.05 is high, below 0.10 medium, anything else low.  A single detection
    leaves the spread undefined and the grades low.  Coverage is the detected
    fraction.  Confidence combines consistency with coverage.
    """
    if len(estimates) != len(METHOD_NAMES):
        raise InvalidInputError(
            f"cross_validate expects exactly {len(METHOD_NAMES)} estimates, got {len(estimates)}"
        )
    detected = [e for e in estimates if e.detected]
    coverage = len(detected) / len(estimates)
    candidates = tuple(
        v
        for e in estimates
        if e.method != "binned"
        for v in e.audit
    )
    if not detected:
        return CrossValidationResult(
            False, None, None, None, None, None, None, None, None,
            coverage, tuple(estimates), candidates,
        )
    values = np.array([e.threshold_ratio for e in detected], dtype=float)
    final = float(np.median(values))
    mean = float(values.mean())
    std = float(values.std(ddof=1)) if len(values) > 1 else None
    std_pop = float(values.std(ddof=0))
    if std is None:
        consistency = "low"
    elif std < 0.05:
        consistency = "high"
    elif std < 0.10:
        consistency = "medium"
    else:
        consistency = "low"
    if consistency == "high" and coverage >= 0.8:
        confidence = "high"
    elif consistency in ("high", "medium") and coverage >= 0.6:
        confidence = "medium"
    else:
        confidence = "low"
    return CrossValidationResult(
        True,
        final,
        mean,
        std,
        std_pop,
        float(values.min()),
        float(values.max()),
        consistency,
        confidence,
        coverage,
        tuple(estimates),
        candidates,
    )


def detect_threshold(
    series: PerformanceSeries, cfg: DegradationConfig | None = None
) -> CrossValidationResult:
    """Convenience wrapper: run all five methods and cross-validate."""
    cfg = cfg or DegradationConfig()
    return cross_validate(run_all_methods(series, cfg))
