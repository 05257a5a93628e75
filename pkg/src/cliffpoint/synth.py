"""Synthetic degradation curves with known ground truth.

Every detector in this package is validated against series produced here:
the true cliff location is chosen up front, so a detection can be scored
exactly.  Generation is fully deterministic for a given seed and documented
down to the draw order, so any port can reproduce the byte-exact series.

Draw order (PCG64 stream):
  1. ratios: uniform mode draws n uniforms; bimodal mode draws n component
     picks, then n value uniforms mapped through the Gaussian inverse CDF.
  2. ratios are sorted ascending.
  3. noise: n value uniforms mapped through the inverse CDF, applied to the
     sorted points in order.  The uniforms are drawn even at sigma = 0 so
     the stream layout never depends on sigma.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .core import DegradationConfig, PerformanceSeries
from .detection import CrossValidationResult
from .errors import InvalidConfigError

__all__ = [
    "SynthConfig",
    "SynthTruth",
    "OracleRecord",
    "generate_series",
    "as_records",
    "oracle_score",
]

# performance is clamped strictly inside (0, 1) so the exact-0/1 artifact
# filter in preprocessing never thins synthetic data
PERF_FLOOR = 1e-6
PERF_CEIL = 1.0 - 1e-6

_U_TINY = 2.0**-53  # keep inverse-CDF inputs inside the open interval


@dataclass(frozen=True)
class SynthConfig:
    """Recipe for one synthetic series.

    cliff_ratio None selects flat mode: constant p_high plus noise, the
    negative control for false-positive measurement.
    """

    n_points: int = 1000
    cliff_ratio: float | None = 0.45
    p_high: float = 0.565
    p_low: float = 0.278
    transition_width: float = 0.004
    noise_sigma: float = 0.02
    ratio_distribution: str = "uniform"  # uniform | bimodal
    short_mean: float = 0.072
    short_sigma: float = 0.018
    long_mean: float = 0.683
    long_sigma: float = 0.187
    weight_short: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_points < 1:
            raise InvalidConfigError(f"n_points must be positive, got {self.n_points}")
        if not (0 < self.p_high < 1):
            raise InvalidConfigError(f"p_high must be in (0, 1), got {self.p_high}")
        if not (0 < self.p_low < 1):
            raise InvalidConfigError(f"p_low must be in (0, 1), got {self.p_low}")
        if self.transition_width < 0:
            raise InvalidConfigError("transition_width must be nonnegative")
        if self.noise_sigma < 0:
            raise InvalidConfigError("noise_sigma must be nonnegative")
        if self.ratio_distribution not in ("uniform", "bimodal"):
            raise InvalidConfigError(
                f"ratio_distribution must be uniform or bimodal, got {self.ratio_distribution!r}"
            )
        if not (0 <= self.weight_short <= 1):
            raise InvalidConfigError("weight_short must be in [0, 1]")
        if self.cliff_ratio is not None:
            if self.p_high <= self.p_low:
                raise InvalidConfigError("p_high must exceed p_low when a cliff is present")
            half = self.transition_width / 2
            if not (0 < self.cliff_ratio - half and self.cliff_ratio + half < 1):
                raise InvalidConfigError(
                    "cliff_ratio plus or minus half the transition width must stay inside (0, 1)"
                )

    def to_dict(self) -> dict:
        return {
            "n_points": self.n_points,
            "cliff_ratio": self.cliff_ratio,
            "p_high": self.p_high,
            "p_low": self.p_low,
            "transition_width": self.transition_width,
            "noise_sigma": self.noise_sigma,
            "ratio_distribution": self.ratio_distribution,
            "short_mean": self.short_mean,
            "short_sigma": self.short_sigma,
            "long_mean": self.long_mean,
            "long_sigma": self.long_sigma,
            "weight_short": self.weight_short,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class SynthTruth:
    """Ground truth for a generated series: the config, the cliff location,
    and the noiseless mean of the generated points inside each region."""

    config: SynthConfig
    cliff_ratio: float | None
    region_boundaries: tuple[float, ...]
    region_means: tuple[float | None, ...]

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "cliff_ratio": self.cliff_ratio,
            "region_boundaries": list(self.region_boundaries),
            "region_means": list(self.region_means),
        }


def _gauss(rng: np.random.Generator, n: int) -> np.ndarray:
    u = np.clip(rng.random(n), _U_TINY, 1.0 - _U_TINY)
    return ndtri(u)


def _draw_ratios(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.ratio_distribution == "uniform":
        return rng.random(cfg.n_points)
    short = rng.random(cfg.n_points) < cfg.weight_short
    z = _gauss(rng, cfg.n_points)
    mean = np.where(short, cfg.short_mean, cfg.long_mean)
    sigma = np.where(short, cfg.short_sigma, cfg.long_sigma)
    return np.clip(mean + sigma * z, 0.0, 1.0)


def _noiseless_curve(cfg: SynthConfig, ratios: np.ndarray) -> np.ndarray:
    if cfg.cliff_ratio is None:
        return np.full_like(ratios, cfg.p_high)
    half = cfg.transition_width / 2
    lo_edge, hi_edge = cfg.cliff_ratio - half, cfg.cliff_ratio + half
    if cfg.transition_width == 0:
        return np.where(ratios < cfg.cliff_ratio, cfg.p_high, cfg.p_low)
    frac = np.clip((ratios - lo_edge) / cfg.transition_width, 0.0, 1.0)
    return cfg.p_high + frac * (cfg.p_low - cfg.p_high)


def generate_series(cfg: SynthConfig) -> tuple[PerformanceSeries, SynthTruth]:
    """Produce one deterministic series plus its ground truth."""
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    ratios = np.sort(_draw_ratios(cfg, rng), kind="stable")
    clean = _noiseless_curve(cfg, ratios)
    noise = cfg.noise_sigma * _gauss(rng, cfg.n_points)
    perf = np.clip(clean + noise, PERF_FLOOR, PERF_CEIL)
    series = PerformanceSeries(ratios, perf, provenance=f"synth(seed={cfg.seed})")

    boundaries = DegradationConfig().region_boundaries
    edges = [0.0, *boundaries]
    means = []
    for k in range(len(boundaries)):
        lo, hi = edges[k], edges[k + 1]
        closed = k == len(boundaries) - 1
        mask = (ratios >= lo) & ((ratios <= hi) if closed else (ratios < hi))
        means.append(float(clean[mask].mean()) if mask.any() else None)
    truth = SynthTruth(cfg, cfg.cliff_ratio, boundaries, tuple(means))
    return series, truth


def as_records(series: PerformanceSeries, prefix: str = "synth") -> list[dict]:
    """Render a series in the record shape the ingestion layer reads back."""
    return [
        {"id": f"{prefix}{k:05d}", "ratio": float(r), "performance": float(p)}
        for k, (r, p) in enumerate(series.points)
    ]


@dataclass(frozen=True)
class OracleRecord:
    """Scorecard comparing a detection run against generator ground truth."""

    passed: bool
    truth_ratio: float | None
    final_threshold: float | None
    tolerance: float
    abs_error: float | None
    false_positive: bool
    per_method_hits: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "truth_ratio": self.truth_ratio,
            "final_threshold": self.final_threshold,
            "tolerance": self.tolerance,
            "abs_error": self.abs_error,
            "false_positive": self.false_positive,
            "per_method_hits": dict(self.per_method_hits),
        }


def oracle_score(
    result: CrossValidationResult, truth: SynthTruth, tol: float = 0.02
) -> OracleRecord:
    """Grade a detection result against the generator's ground truth.

    Cliff mode passes when the final threshold lands within tol of the true
    cliff.  Flat mode passes only on no detection; a detection there is a
    false positive.  Per-method hits use the same rule method by method.
    """
    if truth.cliff_ratio is None:
        hits = {e.method: not e.detected for e in result.per_method}
        return OracleRecord(
            passed=not result.detected,
            truth_ratio=None,
            final_threshold=result.final_threshold,
            tolerance=tol,
            abs_error=None,
            false_positive=result.detected,
            per_method_hits=hits,
        )
    hits = {
        e.method: bool(
            e.detected and abs(e.threshold_ratio - truth.cliff_ratio) <= tol
        )
        for e in result.per_method
    }
    err = (
        abs(result.final_threshold - truth.cliff_ratio)
        if result.final_threshold is not None
        else None
    )
    return OracleRecord(
        passed=bool(result.detected and err is not None and err <= tol),
        truth_ratio=truth.cliff_ratio,
        final_threshold=result.final_threshold,
        tolerance=tol,
        abs_error=err,
        false_positive=False,
        per_method_hits=hits,
    )
