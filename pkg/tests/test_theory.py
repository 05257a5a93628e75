from __future__ import annotations

import math

import numpy as np
import pytest

from cliffpoint.errors import InvalidConfigError, InvalidInputError, InvalidMatrixError
from cliffpoint.theory import (
    AttentionMatrix,
    RopeParams,
    attention_concentration,
    attention_entropy,
    rope_period,
    rope_threshold,
    unified_threshold,
)


def test_rope_period_fixtures():
    assert rope_period(1e-4) == pytest.approx(62831.85, abs=0.01)
    assert rope_period(2 * math.pi) == pytest.approx(1.0)
    assert rope_period(math.pi) == pytest.approx(2.0)


def test_rope_period_rejects_nonpositive_theta():
    with pytest.raises(InvalidConfigError):
        rope_period(0.0)
    with pytest.raises(InvalidConfigError):
        rope_period(-1e-4)


def test_rope_threshold_fixtures():
    assert rope_threshold(RopeParams(1e-4, 1.0, 131072)) == pytest.approx(0.4794, abs=0.0001)
    assert rope_threshold(RopeParams(1e-4, 0.5, 131072)) == pytest.approx(0.2397, abs=0.0001)
    assert rope_threshold(RopeParams(1e-4, 0.0, 131072)) == 0.0


def test_rope_threshold_clamped_to_one():
    assert rope_threshold(RopeParams(1e-6, 1.0, 131072)) == 1.0


def test_rope_threshold_linear_in_alpha_inverse_in_theta():
    rng = np.random.Generator(np.random.PCG64(47))
    for _ in range(30):
        theta = float(10 ** (-rng.random() * 3 - 2))
        alpha = float(0.1 + 0.4 * rng.random())
        t_max = 10_000_000  # large enough that nothing clamps
        base = rope_threshold(RopeParams(theta, alpha, t_max))
        assert rope_threshold(RopeParams(theta, 2 * alpha, t_max)) == pytest.approx(2 * base)
        assert rope_threshold(RopeParams(2 * theta, alpha, t_max)) == pytest.approx(base / 2)


def test_rope_params_validation():
    with pytest.raises(InvalidConfigError):
        RopeParams(theta=-1.0)
    with pytest.raises(InvalidConfigError):
        RopeParams(alpha=1.6)
    with pytest.raises(InvalidConfigError):
        RopeParams(t_max=0)


def test_unified_threshold_picks_minimum():
    out = unified_threshold(0.49, 0.43, 0.44)
    assert out.threshold == pytest.approx(0.43)
    assert out.bottleneck == "attention"


def test_unified_threshold_single_input():
    out = unified_threshold(0.49)
    assert out.threshold == pytest.approx(0.49)
    assert out.bottleneck == "rope"


def test_unified_threshold_tie_prefers_first():
    out = unified_threshold(0.5, 0.5, 0.5)
    assert out.threshold == 0.5
    assert out.bottleneck == "rope"


def test_unified_threshold_requires_an_input():
    with pytest.raises(InvalidInputError):
        unified_threshold(None, None, None)


def test_unified_threshold_never_exceeds_inputs():
    rng = np.random.Generator(np.random.PCG64(53))
    for _ in range(30):
        vals = [float(v) if rng.random() > 0.3 else None for v in rng.random(3)]
        if all(v is None for v in vals):
            continue
        out = unified_threshold(*vals)
        for v in vals:
            if v is not None:
                assert out.threshold <= v


def test_attention_concentration_fixtures():
    one_hot = AttentionMatrix(np.eye(3))
    assert attention_concentration(one_hot) == 1.0
    uniform = AttentionMatrix(np.full((4, 4), 0.25))
    assert attention_concentration(uniform) == pytest.approx(0.25)
    mixed = AttentionMatrix(np.array([[0.7, 0.3], [0.4, 0.6]]))
    assert attention_concentration(mixed) == pytest.approx(0.65)


def test_attention_entropy_fixtures():
    assert attention_entropy(AttentionMatrix(np.eye(3))) == 0.0
    uniform = AttentionMatrix(np.full((4, 4), 0.25))
    assert attention_entropy(uniform) == pytest.approx(math.log(4), abs=1e-4)
    half = AttentionMatrix(np.array([[0.5, 0.5], [1.0, 0.0]]))
    assert attention_entropy(half) == pytest.approx(math.log(2) / 2, abs=1e-9)


def test_attention_matrix_validation():
    with pytest.raises(InvalidMatrixError):
        AttentionMatrix(np.array([[0.5, 0.5], [0.6, 0.6]]))  # bad row sum
    with pytest.raises(InvalidMatrixError):
        AttentionMatrix(np.array([[1.2, -0.2], [0.5, 0.5]]))  # negative entry
    with pytest.raises(InvalidMatrixError):
        AttentionMatrix(np.array([[0.5, 0.5]]))  # not square


def random_stochastic(rng, L):
    w = rng.random((L, L)) + 1e-9
    return w / w.sum(axis=1, keepdims=True)


def test_attention_metric_bounds():
    rng = np.random.Generator(np.random.PCG64(59))
    for _ in range(30):
        L = int(rng.integers(2, 9))
        m = AttentionMatrix(random_stochastic(rng, L))
        c = attention_concentration(m)
        h = attention_entropy(m)
        assert 1 / L - 1e-12 <= c <= 1 + 1e-12
        assert -1e-12 <= h <= math.log(L) + 1e-12


def test_focus_extremes_coincide():
    # C = 1 exactly when H = 0: both mean one-hot rows
    m = AttentionMatrix(np.eye(5))
    assert attention_concentration(m) == 1.0
    assert attention_entropy(m) == 0.0


def test_from_csv_roundtrip(tmp_path):
    path = tmp_path / "attn.csv"
    path.write_text("0.7,0.3\n0.4,0.6\n")
    m = AttentionMatrix.from_csv(str(path))
    assert attention_concentration(m) == pytest.approx(0.65)


def test_from_csv_rejects_non_square(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0.5,0.5\n")
    with pytest.raises(InvalidMatrixError):
        AttentionMatrix.from_csv(str(path))
