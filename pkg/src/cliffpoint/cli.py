"""Command-line interface.

Subcommands: score, detect, regions, synth, sensitivity, predict-rope,
report.  Machine output (--emit json) is byte-deterministic for a given
input file, configuration, and seed.  A run that finds no threshold is a
successful run; only I/O and validation failures exit nonzero.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from ._version import __version__
from .analysis import SWEEPABLE_PARAMETERS, region_report, sensitivity_sweep
from .core import DegradationConfig, moving_average
from .errors import CliffPointError, IngestError, InvalidConfigError, InvalidReferenceError
from .ingest import FORMATS, ingest_records, read_records
from .report import region_lines, run_detect, sensitivity_lines, sha256_file
from .scoring import dual_f1
from .synth import SynthConfig, as_records, generate_series
from .theory import RopeParams, rope_period, rope_threshold, unified_threshold

__all__ = ["main", "build_parser"]

# field name -> parser for config files and CLI flags; comma-separated
# positions for the range and boundary fields
_INT = ("t_max", "peak_window", "post_min", "post_max", "drop_window",
        "consecutive_rise_run", "n_bins", "ma_window", "trend_window")
_FLOAT = ("min_peak_height", "rise_range_width", "rebound_threshold",
          "bin_drop_min", "percentile_cut", "cliff_theta")
_TUPLE = ("peak_range", "bin_search_range", "region_boundaries")


def _parse_config_value(name: str, raw: str):
    if name in _INT:
        return int(raw)
    if name in _FLOAT:
        return float(raw)
    if name in _TUPLE:
        return tuple(float(part) for part in raw.split(","))
    raise InvalidConfigError(f"unknown configuration key {name!r}")


def _load_config_file(path: str) -> dict:
    overrides = {}
    for line_num, line in enumerate(Path(path).read_text().splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise InvalidConfigError(f"{path}:{line_num}: expected key=value, got {text!r}")
        key, _, value = text.partition("=")
        overrides[key.strip()] = _parse_config_value(key.strip(), value.strip())
    return overrides


def build_config(args: argparse.Namespace) -> DegradationConfig:
    """Defaults, then config-file values, then explicit CLI flags."""
    overrides = {}
    if getattr(args, "config", None):
        overrides.update(_load_config_file(args.config))
    for name in (*_INT, *_FLOAT, *_TUPLE):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = _parse_config_value(name, value) if isinstance(value, str) else value
    return DegradationConfig().with_overrides(**overrides)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("detection configuration")
    group.add_argument("--config", metavar="PATH", help="flat key=value configuration file")
    for name in _INT:
        group.add_argument(f"--{name.replace('_', '-')}", dest=name, type=int, metavar="N")
    for name in _FLOAT:
        group.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float, metavar="X")
    for name in _TUPLE:
        group.add_argument(
            f"--{name.replace('_', '-')}", dest=name, metavar="A,B", help="comma-separated"
        )


def _add_io_flags(parser: argparse.ArgumentParser, need_input: bool = True) -> None:
    if need_input:
        parser.add_argument("--input", required=True, metavar="PATH", help="record file")
        parser.add_argument("--format", choices=FORMATS, default="csv")
    parser.add_argument("--output", metavar="PATH", help="write here instead of stdout")
    parser.add_argument("--emit", choices=("json", "md"), default="json")


def _write_text(args: argparse.Namespace, text: str) -> None:
    if getattr(args, "output", None):
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _emit(args: argparse.Namespace, payload: dict, md_lines: list[str]) -> None:
    if args.emit == "json":
        _write_text(args, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        _write_text(args, "\n".join(md_lines) + "\n")


def _write_points_csv(path: str, xs, ys, y_name: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["ratio", y_name])
        for x, y in zip(xs, ys):
            writer.writerow([repr(float(x)), repr(float(y))])


def cmd_score(args: argparse.Namespace) -> int:
    rows = []
    for line, rec in read_records(args.input, args.format):
        if rec.prediction is None or rec.reference is None:
            raise IngestError(f"line {line}: score needs prediction and reference")
        try:
            breakdown = dual_f1(rec.prediction, rec.reference)
        except InvalidReferenceError:
            raise IngestError(
                f"line {line}: reference for {rec.id!r} normalizes to empty text"
            ) from None
        rows.append({"id": rec.id, **breakdown.to_dict()})
    md = ["| id | f1 | matched_by | token_f1 | char_f1 |", "|---|---|---|---|---|"]
    md.extend(
        f"| {r['id']} | {r['f1']:.4f} | {r['matched_by']} "
        f"| {r['token_f1']:.4f} | {r['char_f1']:.4f} |"
        for r in rows
    )
    _emit(args, {"records": rows}, md)
    return 0


def _detect_report(args: argparse.Namespace, sensitivity=None, theory=None):
    cfg = build_config(args)
    series = ingest_records(args.input, args.format, cfg)
    return cfg, series, run_detect(
        series,
        cfg,
        permutations=args.permutations,
        seed=args.seed,
        sensitivity=sensitivity,
        theory=theory,
        input_digest=sha256_file(args.input),
    )


def _write_plots(args: argparse.Namespace, cfg: DegradationConfig, series) -> None:
    if getattr(args, "plot_csv", None):
        _write_points_csv(args.plot_csv, series.ratios, series.performances, "performance")
    if getattr(args, "trend_csv", None):
        trend = moving_average(series.performances, cfg.trend_window)
        _write_points_csv(args.trend_csv, series.ratios, trend, "trend")


def cmd_detect(args: argparse.Namespace) -> int:
    cfg, series, report = _detect_report(args)
    _write_plots(args, cfg, series)
    if args.emit == "json":
        _write_text(args, report.to_json())
    else:
        _write_text(args, report.to_markdown())
    return 0


def cmd_regions(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    series = ingest_records(args.input, args.format, cfg)
    rep = region_report(
        series,
        list(cfg.region_boundaries),
        permutations=args.permutations,
        seed=args.seed,
    )
    _emit(args, rep.to_dict(), ["# Region statistics", "", *region_lines(rep)])
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    synth_cfg = SynthConfig(
        n_points=args.n_points,
        cliff_ratio=None if args.flat else args.cliff_ratio,
        p_high=args.p_high,
        p_low=args.p_low,
        transition_width=args.transition_width,
        noise_sigma=args.noise_sigma,
        ratio_distribution=args.distribution,
        seed=args.seed,
    )
    series, truth = generate_series(synth_cfg)
    records = as_records(series)
    if args.format == "csv":
        lines = ["id,ratio,performance"]
        lines.extend(f"{r['id']},{r['ratio']!r},{r['performance']!r}" for r in records)
        _write_text(args, "\n".join(lines) + "\n")
    else:
        _write_text(
            args,
            "".join(json.dumps(r, sort_keys=True) + "\n" for r in records),
        )
    if args.truth:
        Path(args.truth).write_text(
            json.dumps(truth.to_dict(), indent=2, sort_keys=True) + "\n"
        )
    return 0


def cmd_sensitivity(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    series = ingest_records(args.input, args.format, cfg)
    cast = int if args.parameter == "peak_window" else float
    grid = [cast(part) for part in args.grid.split(",") if part.strip()]
    rep = sensitivity_sweep(series, cfg, args.parameter, grid)
    _emit(
        args,
        rep.to_dict(),
        [f"# Sensitivity: {rep.parameter}", "", *sensitivity_lines(rep)],
    )
    return 0


def _theory_payload(args: argparse.Namespace, cfg: DegradationConfig) -> dict:
    params = RopeParams(theta=args.theta, alpha=args.alpha, t_max=cfg.t_max)
    threshold = rope_threshold(params)
    payload = {
        "theta": params.theta,
        "alpha": params.alpha,
        "t_max": params.t_max,
        "period_tokens": rope_period(params.theta),
        "rope_threshold": threshold,
    }
    if args.l_attention is not None or args.l_info is not None:
        unified = unified_threshold(threshold, args.l_attention, args.l_info)
        payload["l_attention"] = args.l_attention
        payload["l_info"] = args.l_info
        payload["unified_threshold"] = unified.threshold
        payload["bottleneck"] = unified.bottleneck
    return payload


def cmd_predict_rope(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    payload = _theory_payload(args, cfg)
    md = ["# Predicted threshold", ""]
    md.append(f"- period: {payload['period_tokens']:.2f} tokens")
    md.append(
        f"- threshold: {payload['rope_threshold']:.4f} "
        f"({100 * payload['rope_threshold']:.1f}% of {payload['t_max']} tokens)"
    )
    if "unified_threshold" in payload:
        md.append(
            f"- unified: {payload['unified_threshold']:.4f} "
            f"(bottleneck: {payload['bottleneck']})"
        )
    _emit(args, payload, md)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    sensitivity = None
    theory = None
    if args.parameter:
        if not args.grid:
            raise InvalidConfigError("--parameter requires --grid")
        series = ingest_records(args.input, args.format, cfg)
        cast = int if args.parameter == "peak_window" else float
        grid = [cast(part) for part in args.grid.split(",") if part.strip()]
        sensitivity = sensitivity_sweep(series, cfg, args.parameter, grid)
    if args.theta is not None:
        theory = _theory_payload(args, cfg)
    cfg, series, report = _detect_report(args, sensitivity=sensitivity, theory=theory)
    _write_plots(args, cfg, series)
    if args.emit == "json":
        _write_text(args, report.to_json())
    else:
        _write_text(args, report.to_markdown())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cliffpoint",
        description="Detect cliff-like degradation thresholds in performance-vs-ratio data.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, need_input: bool = True) -> None:
        _add_io_flags(p, need_input)
        _add_config_flags(p)
        p.add_argument("--seed", type=int, default=0, help="RNG seed for permutation tests")
        p.add_argument("--permutations", type=int, default=10_000)

    p = sub.add_parser("score", help="dual-level F1 per record")
    common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("detect", help="run the five-method threshold detection")
    common(p)
    p.add_argument("--plot-csv", metavar="PATH", help="write (ratio, performance) CSV")
    p.add_argument("--trend-csv", metavar="PATH", help="write (ratio, moving-average trend) CSV")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("regions", help="per-region statistics and contrasts")
    common(p)
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("synth", help="generate a synthetic series with known truth")
    _add_io_flags(p, need_input=False)
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--n-points", type=int, default=1000)
    p.add_argument("--cliff-ratio", type=float, default=0.45)
    p.add_argument("--flat", action="store_true", help="no cliff (negative control)")
    p.add_argument("--p-high", type=float, default=0.565)
    p.add_argument("--p-low", type=float, default=0.278)
    p.add_argument("--transition-width", type=float, default=0.004)
    p.add_argument("--noise-sigma", type=float, default=0.02)
    p.add_argument("--distribution", choices=("uniform", "bimodal"), default="uniform")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--truth", metavar="PATH", help="write ground-truth JSON here")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sensitivity", help="sweep one detection parameter")
    common(p)
    p.add_argument("--parameter", required=True, choices=SWEEPABLE_PARAMETERS)
    p.add_argument("--grid", required=True, metavar="V1,V2,...")
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("predict-rope", help="positional-encoding threshold prediction")
    _add_io_flags(p, need_input=False)
    _add_config_flags(p)
    p.add_argument("--theta", type=float, default=1e-4)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--l-attention", type=float)
    p.add_argument("--l-info", type=float)
    p.set_defaults(func=cmd_predict_rope)

    p = sub.add_parser("report", help="detection, regions, and theory in one document")
    common(p)
    p.add_argument("--parameter", choices=SWEEPABLE_PARAMETERS)
    p.add_argument("--grid", metavar="V1,V2,...")
    p.add_argument("--theta", type=float, help="include theory section")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--l-attention", type=float)
    p.add_argument("--l-info", type=float)
    p.add_argument("--plot-csv", metavar="PATH")
    p.add_argument("--trend-csv", metavar="PATH")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliffPointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
