"""Theoretical threshold predictors and attention-matrix metrics.

The positional-encoding period gives one candidate threshold; attention and
information bottlenecks, when estimates for them exist, are combined with it
by taking the minimum.  Attention matrices arrive as dense CSV files; this
module only measures them, it does not produce them.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError, InvalidInputError, InvalidMatrixError

__all__ = [
    "RopeParams",
    "AttentionMatrix",
    "UnifiedPrediction",
    "rope_period",
    "rope_threshold",
    "unified_threshold",
    "attention_concentration",
    "attention_entropy",
]

ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class RopeParams:
    """Rotary-position-embedding parameters for threshold prediction.

    theta is the base frequency; alpha scales the period into a usable
    context length.  alpha = 1.0 predicts the full period; values near
    0.4 to 0.5 model earlier breakdown.
    """

    theta: float = 1e-4
    alpha: float = 1.0
    t_max: int = 131072

    def __post_init__(self) -> None:
        if self.theta <= 0:
            raise InvalidConfigError(f"theta must be positive, got {self.theta}")
        if not (0 <= self.alpha <= 1.5):
            raise InvalidConfigError(f"alpha must be in [0, 1.5], got {self.alpha}")
        if self.t_max <= 0:
            raise InvalidConfigError(f"t_max must be positive, got {self.t_max}")

    def to_dict(self) -> dict:
        return {"theta": self.theta, "alpha": self.alpha, "t_max": self.t_max}


def rope_period(theta: float) -> float:
    """Token period of the slowest rotary component: 2*pi/theta."""
    if theta <= 0:
        raise InvalidConfigError(f"theta must be positive, got {theta}")
    return 2.0 * math.pi / theta


def rope_threshold(params: RopeParams) -> float:
    """Predicted degradation threshold as a ratio of t_max, clamped to [0, 1]."""
    raw = params.alpha * rope_period(params.theta) / params.t_max
    return min(1.0, max(0.0, raw))


@dataclass(frozen=True)
class UnifiedPrediction:
    """Minimum over the available bottleneck predictions."""

    threshold: float
    bottleneck: str  # rope | attention | info
    inputs: dict

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "bottleneck": self.bottleneck,
            "inputs": self.inputs,
        }


def unified_threshold(
    l_rope: float | None,
    l_attention: float | None = None,
    l_info: float | None = None,
) -> UnifiedPrediction:
    """Take the minimum of the supplied bottleneck thresholds.

    Ties resolve to the earliest name in (rope, attention, info).  At least
    one input must be present.
    """
    named = [
        ("rope", l_rope),
        ("attention", l_attention),
        ("info", l_info),
    ]
    present = [(name, float(v)) for name, v in named if v is not None]
    if not present:
        raise InvalidInputError("unified_threshold needs at least one bottleneck value")
    bottleneck, value = min(present, key=lambda item: item[1])
    return UnifiedPrediction(value, bottleneck, {name: v for name, v in named})


@dataclass(frozen=True)
class AttentionMatrix:
    """A row-stochastic L x L attention weight matrix."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] == 0:
            raise InvalidMatrixError(f"weights must be a nonempty square matrix, got shape {w.shape}")
        if (w < 0).any():
            raise InvalidMatrixError("attention weights must be nonnegative")
        sums = w.sum(axis=1)
        bad = np.abs(sums - 1.0) > ROW_SUM_TOL
        if bad.any():
            row = int(np.argmax(bad))
            raise InvalidMatrixError(
                f"row {row} sums to {sums[row]!r}, expected 1 within {ROW_SUM_TOL}"
            )
        object.__setattr__(self, "weights", w)

    @property
    def length(self) -> int:
        return int(self.weights.shape[0])

    @classmethod
    def from_csv(cls, path: str) -> AttentionMatrix:
        """Read a dense CSV of L rows with L comma-separated reals each."""
        rows = []
        with open(path, newline="") as fh:
            for line in csv.reader(fh):
                if not line:
                    continue
                rows.append([float(cell) for cell in line])
        if not rows:
            raise InvalidMatrixError(f"{path} holds no matrix rows")
        widths = {len(row) for row in rows}
        if widths != {len(rows)}:
            raise InvalidMatrixError(
                f"{path} is not square: {len(rows)} rows with widths {sorted(widths)}"
            )
        return cls(np.array(rows, dtype=float))


def attention_concentration(m: AttentionMatrix) -> float:
    """Mean over rows of the largest weight in the row; in [1/L, 1]."""
    return float(m.weights.max(axis=1).mean())


def attention_entropy(m: AttentionMatrix) -> float:
    """Mean row entropy in nats, with 0*ln(0) taken as 0; in [0, ln L]."""
    w = m.weights
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(w > 0, w * np.log(np.where(w > 0, w, 1.0)), 0.0)
    # + 0.0 turns the -0.0 of an all-deterministic matrix into 0.0
    return float(-terms.sum() / m.length) + 0.0
