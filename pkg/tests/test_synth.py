from __future__ import annotations

import numpy as np
import pytest

from cliffpoint.core import preprocess
from cliffpoint.detection import METHOD_NAMES, CrossValidationResult, ThresholdEstimate
from cliffpoint.errors import InvalidConfigError
from cliffpoint.synth import SynthConfig, as_records, generate_series, oracle_score


def test_same_seed_is_bit_identical():
    cfg = SynthConfig(cliff_ratio=0.45, ratio_distribution="bimodal", seed=42)
    a, _ = generate_series(cfg)
    b, _ = generate_series(cfg)
    assert a.ratios.tobytes() == b.ratios.tobytes()
    assert a.performances.tobytes() == b.performances.tobytes()


def test_different_seeds_differ():
    a, _ = generate_series(SynthConfig(seed=1))
    b, _ = generate_series(SynthConfig(seed=2))
    assert not np.array_equal(a.performances, b.performances)


def test_noiseless_step_values():
    cfg = SynthConfig(
        n_points=400, cliff_ratio=0.45, p_high=0.55, p_low=0.30,
        transition_width=0.0, noise_sigma=0.0, seed=3,
    )
    series, _ = generate_series(cfg)
    r, p = series.ratios, series.performances
    assert np.all(p[r < 0.45] == 0.55)
    assert np.all(p[r >= 0.45] == 0.30)


def test_flat_mode_constant():
    cfg = SynthConfig(n_points=100, cliff_ratio=None, p_high=0.5, noise_sigma=0.0, seed=4)
    series, truth = generate_series(cfg)
    assert np.all(series.performances == 0.5)
    assert truth.cliff_ratio is None
    assert all(m == pytest.approx(0.5) for m in truth.region_means if m is not None)


def test_transition_ramp_is_linear():
    cfg = SynthConfig(
        n_points=2000, cliff_ratio=0.45, p_high=0.6, p_low=0.2,
        transition_width=0.2, noise_sigma=0.0, seed=5,
    )
    series, _ = generate_series(cfg)
    r, p = series.ratios, series.performances
    inside = (r > 0.35) & (r < 0.55)
    expected = 0.6 + (r[inside] - 0.35) / 0.2 * (0.2 - 0.6)
    assert np.allclose(p[inside], expected)


def test_noise_clamped_inside_unit_interval():
    cfg = SynthConfig(n_points=500, cliff_ratio=None, p_high=0.5, noise_sigma=5.0, seed=6)
    series, _ = generate_series(cfg)
    assert series.performances.min() > 0.0
    assert series.performances.max() < 1.0
    cleaned = preprocess(series)
    assert len(cleaned) == len(series)  # the 0/1 filter removes nothing


def test_config_validation():
    with pytest.raises(InvalidConfigError):
        SynthConfig(p_high=0.3, p_low=0.5)  # inverted with a cliff present
    with pytest.raises(InvalidConfigError):
        SynthConfig(cliff_ratio=0.01, transition_width=0.1)  # ramp leaves (0,1)
    with pytest.raises(InvalidConfigError):
        SynthConfig(noise_sigma=-0.1)
    with pytest.raises(InvalidConfigError):
        SynthConfig(ratio_distribution="lognormal")
    with pytest.raises(InvalidConfigError):
        SynthConfig(n_points=0)
    # flat mode ignores the high/low ordering rule
    SynthConfig(cliff_ratio=None, p_high=0.3, p_low=0.5)


def test_bimodal_ratios_form_two_modes():
    cfg = SynthConfig(n_points=4000, cliff_ratio=None, ratio_distribution="bimodal", seed=7)
    series, _ = generate_series(cfg)
    r = series.ratios
    assert 0.0 <= r.min() and r.max() <= 1.0
    short_fraction = float((r < 0.3).mean())
    assert short_fraction == pytest.approx(0.5, abs=0.05)
    assert abs(r[r < 0.3].mean() - 0.072) < 0.02
    assert abs(r[r >= 0.3].mean() - 0.683) < 0.05


def test_truth_region_means_track_noiseless_curve():
    cfg = SynthConfig(cliff_ratio=0.45, seed=8)
    _, truth = generate_series(cfg)
    stable, transition, degraded = truth.region_means
    assert stable == pytest.approx(0.565)
    assert degraded == pytest.approx(0.278)
    assert 0.278 < transition < 0.565


def test_as_records_round_trip_shape():
    series, _ = generate_series(SynthConfig(n_points=5, seed=9))
    records = as_records(series)
    assert [r["id"] for r in records] == [f"synth0000{k}" for k in range(5)]
    assert records[0]["ratio"] == pytest.approx(series.ratios[0])
    assert records[4]["performance"] == pytest.approx(series.performances[4])


def make_cv(final, detected, method_hits=None):
    method_hits = method_hits if method_hits is not None else [detected] * 5
    per = tuple(
        ThresholdEstimate(m, hit, final if hit else None, 0.4 if hit else None, None, ())
        for m, hit in zip(METHOD_NAMES, method_hits)
    )
    coverage = sum(method_hits) / 5
    if detected:
        return CrossValidationResult(
            True, final, final, 0.0, 0.0, final, final,
            "high", "high", coverage, per, (),
        )
    return CrossValidationResult(
        False, None, None, None, None, None, None, None, None, coverage, per, (),
    )


def test_oracle_score_pass_within_tolerance():
    _, truth = generate_series(SynthConfig(cliff_ratio=0.45, seed=10))
    record = oracle_score(make_cv(0.452, True), truth, tol=0.02)
    assert record.passed
    assert record.abs_error == pytest.approx(0.002)
    assert all(record.per_method_hits.values())


def test_oracle_score_fail_outside_tolerance():
    _, truth = generate_series(SynthConfig(cliff_ratio=0.45, seed=10))
    record = oracle_score(make_cv(0.52, True), truth, tol=0.02)
    assert not record.passed
    assert not record.false_positive


def test_oracle_score_flat_true_negative():
    _, truth = generate_series(SynthConfig(cliff_ratio=None, p_high=0.5, seed=10))
    record = oracle_score(make_cv(None, False), truth, tol=0.02)
    assert record.passed
    assert not record.false_positive
    assert all(record.per_method_hits.values())


def test_oracle_score_flat_detection_is_false_positive():
    _, truth = generate_series(SynthConfig(cliff_ratio=None, p_high=0.5, seed=10))
    record = oracle_score(make_cv(0.44, True), truth, tol=0.02)
    assert not record.passed
    assert record.false_positive
