from __future__ import annotations

import json

import numpy as np
import pytest

from cliffpoint.cli import main
from cliffpoint.errors import IngestError
from cliffpoint.ingest import ingest_records, read_records, resolve_records
from cliffpoint.report import run_detect
from cliffpoint.synth import SynthConfig, generate_series


def write(path, text):
    path.write_text(text)
    return str(path)


# --- file parsing ---


def test_csv_token_count_derives_ratio(tmp_path):
    path = write(tmp_path / "a.csv", "id,token_count,performance\ns1,65536,0.4\n")
    series = resolve_records(read_records(path))
    assert series.ratios[0] == pytest.approx(0.5)  # 65536 / 131072
    assert series.performances[0] == pytest.approx(0.4)
    assert "derived_ratio=1" in series.provenance


def test_csv_text_pair_is_scored(tmp_path):
    path = write(
        tmp_path / "a.csv",
        'id,ratio,prediction,reference\ns1,0.45,cat sat,the cat sat\n',
    )
    series = resolve_records(read_records(path))
    assert series.ratios[0] == pytest.approx(0.45)
    assert series.performances[0] == pytest.approx(0.8)
    assert "scored=1" in series.provenance


def test_missing_id_autofills_row_number(tmp_path):
    path = write(tmp_path / "a.csv", "ratio,performance\n0.2,0.5\n0.3,0.5\n")
    records = read_records(path)
    assert [rec.id for _, rec in records] == ["row1", "row2"]


def test_token_count_and_ratio_together_rejected(tmp_path):
    path = write(
        tmp_path / "a.csv",
        "id,token_count,ratio,performance\ns1,100,0.1,0.5\n",
    )
    with pytest.raises(IngestError, match="line 2.*not both"):
        read_records(path)


def test_record_without_any_length_field_rejected(tmp_path):
    path = write(tmp_path / "a.csv", "id,ratio,performance\ns1,,0.5\n")
    with pytest.raises(IngestError, match="line 2"):
        read_records(path)


def test_record_without_performance_or_texts_rejected(tmp_path):
    path = write(tmp_path / "a.csv", "id,ratio,performance\ns1,0.4,\n")
    with pytest.raises(IngestError, match="line 2.*performance"):
        read_records(path)


def test_ratio_outside_unit_interval_rejected(tmp_path):
    path = write(tmp_path / "a.csv", "id,ratio,performance\ns1,1.5,0.5\n")
    with pytest.raises(IngestError, match=r"line 2.*\[0, 1\]"):
        read_records(path)


def test_negative_token_count_rejected(tmp_path):
    path = write(tmp_path / "a.csv", "id,token_count,performance\ns1,-3,0.5\n")
    with pytest.raises(IngestError, match="line 2.*nonnegative"):
        read_records(path)


def test_header_must_name_a_length_column(tmp_path):
    path = write(tmp_path / "a.csv", "id,performance\ns1,0.5\n")
    with pytest.raises(IngestError, match="token_count or ratio"):
        read_records(path)


def test_empty_file_rejected(tmp_path):
    path = write(tmp_path / "a.csv", "")
    with pytest.raises(IngestError):
        read_records(path)
    header_only = write(tmp_path / "b.csv", "id,ratio,performance\n")
    with pytest.raises(IngestError, match="no records"):
        read_records(header_only)


def test_missing_file_and_bad_format_rejected(tmp_path):
    with pytest.raises(IngestError, match="no such file"):
        read_records(tmp_path / "nope.csv")
    path = write(tmp_path / "a.csv", "id,ratio,performance\ns1,0.4,0.5\n")
    with pytest.raises(IngestError, match="format"):
        read_records(path, format="xml")


def test_jsonl_mirrors_csv(tmp_path):
    csv_path = write(
        tmp_path / "a.csv",
        "id,token_count,performance\ns1,65536,0.4\ns2,131072,0.3\n",
    )
    jsonl_path = write(
        tmp_path / "a.jsonl",
        '{"id": "s1", "token_count": 65536, "performance": 0.4}\n'
        '{"id": "s2", "token_count": 131072, "performance": 0.3}\n',
    )
    a = resolve_records(read_records(csv_path))
    b = resolve_records(read_records(jsonl_path, format="jsonl"))
    assert np.array_equal(a.ratios, b.ratios)
    assert np.array_equal(a.performances, b.performances)


def test_jsonl_errors_carry_line_numbers(tmp_path):
    path = write(tmp_path / "a.jsonl", '{"ratio": 0.4, "performance": 0.5}\n{broken\n')
    with pytest.raises(IngestError, match=":2:"):
        read_records(path, format="jsonl")
    arr = write(tmp_path / "b.jsonl", "[1, 2]\n")
    with pytest.raises(IngestError, match=":1:.*object"):
        read_records(arr, format="jsonl")


def test_empty_reference_fails_at_scoring(tmp_path):
    path = write(
        tmp_path / "a.csv", 'id,ratio,prediction,reference\ns1,0.4,cat,"   "\n'
    )
    with pytest.raises(IngestError, match="line 2.*reference"):
        resolve_records(read_records(path))


def test_ingest_preprocesses(tmp_path):
    path = write(
        tmp_path / "a.csv",
        "id,ratio,performance\n"
        "s1,0.40,0.6\n"
        "s2,0.40,0.4\n"  # duplicate ratio, merged by mean
        "s3,0.20,0.0\n"  # exact floor, dropped
        "s4,0.70,0.3\n",
    )
    series = ingest_records(path)
    assert series.is_preprocessed()
    assert np.array_equal(series.ratios, [0.40, 0.70])
    assert series.performances[0] == pytest.approx(0.5)
    assert "removed=1" in series.provenance
    assert "merged=1" in series.provenance


# --- command line ---


def run_cli(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def synth_file(tmp_path, *extra):
    path = tmp_path / "series.csv"
    code = main(["synth", "--seed", "42", "--output", str(path), *extra])
    assert code == 0
    return str(path)


def test_cli_synth_detect_round_trip(tmp_path, capsys):
    path = synth_file(tmp_path)
    code, out, _ = run_cli(capsys, ["detect", "--input", path, "--emit", "json"])
    assert code == 0
    payload = json.loads(out)
    assert payload["detected"]
    assert abs(payload["detection"]["final_threshold"] - 0.45) < 0.02
    assert payload["input_digest"].startswith("sha256:")
    assert len(payload["detection"]["methods"]) == 5


def test_cli_detect_reports_are_byte_identical(tmp_path):
    path = synth_file(tmp_path)
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    assert main(["detect", "--input", path, "--output", str(out1)]) == 0
    assert main(["detect", "--input", path, "--output", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_cli_synth_is_reproducible(tmp_path):
    a = synth_file(tmp_path)
    b = tmp_path / "again.csv"
    assert main(["synth", "--seed", "42", "--output", str(b)]) == 0
    assert open(a, "rb").read() == b.read_bytes()


def test_cli_detect_markdown(tmp_path, capsys):
    path = synth_file(tmp_path)
    code, out, _ = run_cli(capsys, ["detect", "--input", path, "--emit", "md"])
    assert code == 0
    assert "## Detection" in out
    assert "- final threshold: 0.4" in out
    assert "| gradient | yes |" in out


def test_cli_score(tmp_path, capsys):
    path = write(
        tmp_path / "a.csv",
        "id,ratio,prediction,reference\n"
        "s1,0.1,cat sat,the cat sat\n"
        's2,0.2,the cat sat on the mat today,The cat sat on the mat\n',
    )
    code, out, _ = run_cli(capsys, ["score", "--input", path, "--emit", "json"])
    assert code == 0
    rows = json.loads(out)["records"]
    assert rows[0]["f1"] == pytest.approx(0.8)
    assert rows[0]["matched_by"] == "token"
    assert rows[1]["f1"] == 1.0
    assert rows[1]["matched_by"] == "substring"


def test_cli_regions(tmp_path, capsys):
    path = synth_file(tmp_path)
    code, out, _ = run_cli(
        capsys, ["regions", "--input", path, "--emit", "json", "--permutations", "500"]
    )
    assert code == 0
    payload = json.loads(out)
    names = [r["name"] for r in payload["regions"]]
    assert names == ["stable", "transition", "degraded"]


def test_cli_sensitivity(tmp_path, capsys):
    path = synth_file(tmp_path)
    code, out, _ = run_cli(
        capsys,
        [
            "sensitivity", "--input", path,
            "--parameter", "peak_window", "--grid", "3,4,5",
            "--emit", "json",
        ],
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["parameter"] == "peak_window"
    assert payload["grid"] == [3, 4, 5]
    assert payload["max_deviation"] <= 0.01


def test_cli_predict_rope(capsys):
    code, out, _ = run_cli(capsys, ["predict-rope", "--theta", "1e-4", "--emit", "json"])
    assert code == 0
    payload = json.loads(out)
    assert payload["period_tokens"] == pytest.approx(62831.85, abs=0.01)
    assert payload["rope_threshold"] == pytest.approx(0.4794, abs=1e-4)
    assert "unified_threshold" not in payload


def test_cli_predict_rope_unified(capsys):
    code, out, _ = run_cli(
        capsys,
        ["predict-rope", "--theta", "1e-4", "--l-attention", "0.43", "--emit", "json"],
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["unified_threshold"] == pytest.approx(0.43)
    assert payload["bottleneck"] == "attention"


def test_cli_config_file_and_flag_precedence(tmp_path, capsys):
    path = synth_file(tmp_path)
    cfg_path = write(
        tmp_path / "run.cfg",
        "# sweep setup\npeak_window = 7\nrebound_threshold = 0.9\n",
    )
    code, out, _ = run_cli(
        capsys, ["detect", "--input", path, "--config", cfg_path, "--emit", "json"]
    )
    assert code == 0
    cfg = json.loads(out)["config"]
    assert cfg["peak_window"] == 7
    assert cfg["rebound_threshold"] == 0.9

    code, out, _ = run_cli(
        capsys,
        [
            "detect", "--input", path, "--config", cfg_path,
            "--peak-window", "5", "--emit", "json",
        ],
    )
    assert code == 0
    cfg = json.loads(out)["config"]
    assert cfg["peak_window"] == 5  # flag beats file
    assert cfg["rebound_threshold"] == 0.9


def test_cli_unknown_config_key_fails(tmp_path, capsys):
    path = synth_file(tmp_path)
    cfg_path = write(tmp_path / "run.cfg", "peek_window = 7\n")
    code, _, err = run_cli(capsys, ["detect", "--input", path, "--config", cfg_path])
    assert code == 1
    assert "peek_window" in err


def test_cli_plot_exports(tmp_path, capsys):
    path = synth_file(tmp_path)
    plot, trend = tmp_path / "plot.csv", tmp_path / "trend.csv"
    code = main(
        [
            "detect", "--input", path, "--output", str(tmp_path / "r.json"),
            "--plot-csv", str(plot), "--trend-csv", str(trend),
        ]
    )
    assert code == 0
    plot_lines = plot.read_text().splitlines()
    trend_lines = trend.read_text().splitlines()
    assert plot_lines[0] == "ratio,performance"
    assert trend_lines[0] == "ratio,trend"
    assert len(plot_lines) == len(trend_lines)
    first = plot_lines[1].split(",")
    assert 0.0 < float(first[0]) < 1.0


def test_cli_flat_series_exits_zero(tmp_path, capsys):
    path = tmp_path / "flat.csv"
    assert main(["synth", "--flat", "--p-high", "0.5", "--seed", "3",
                 "--output", str(path)]) == 0
    code, out, _ = run_cli(capsys, ["detect", "--input", str(path), "--emit", "json"])
    assert code == 0
    payload = json.loads(out)
    assert payload["detected"] is False
    assert payload["detection"]["final_threshold"] is None


def test_cli_missing_input_exits_one(tmp_path, capsys):
    code, _, err = run_cli(capsys, ["detect", "--input", str(tmp_path / "nope.csv")])
    assert code == 1
    assert "no such file" in err


def test_cli_synth_truth_sidecar(tmp_path):
    truth_path = tmp_path / "truth.json"
    synth_file(tmp_path, "--truth", str(truth_path))
    truth = json.loads(truth_path.read_text())
    assert truth["cliff_ratio"] == 0.45
    assert len(truth["region_means"]) == 3


def test_cli_report_includes_theory_and_sensitivity(tmp_path, capsys):
    path = synth_file(tmp_path)
    code, out, _ = run_cli(
        capsys,
        [
            "report", "--input", path, "--emit", "md",
            "--parameter", "peak_window", "--grid", "3,5",
            "--theta", "1e-4", "--permutations", "500",
        ],
    )
    assert code == 0
    assert "## Sensitivity: peak_window" in out
    assert "## Theory" in out
    assert "rope_threshold: 0.4794" in out


# --- report determinism ---


def test_run_detect_json_is_deterministic():
    series, _ = generate_series(SynthConfig(seed=11))
    a = run_detect(series, permutations=500).to_json()
    b = run_detect(series, permutations=500).to_json()
    assert a == b
    assert a.endswith("\n")
    assert "timestamp" not in a


def test_report_markdown_number_formats():
    series, _ = generate_series(SynthConfig(seed=11))
    md = run_detect(series, permutations=500).to_markdown()
    assert "## Regions" in md
    # ratios carry four decimals, percentages one
    final_line = next(l for l in md.splitlines() if l.startswith("- final threshold"))
    assert "%)" in final_line
    left = final_line.split()[3]
    assert len(left.split(".")[1]) == 4
