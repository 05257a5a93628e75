"""Run orchestration and deterministic report assembly.

A RunReport bundles everything one analysis produced: the configuration,
what preprocessing did, each method's estimate with its full peak audit, the
cross-validated threshold, region statistics, and optional sensitivity and
theory sections.  Machine output is canonical JSON with sorted keys, full
float precision, and no timestamps, so identical inputs yield identical
bytes.  Human output is markdown with ratios at four decimals and
percentages at one.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass

from ._version import __version__
from .analysis import RegionReport, SensitivityReport, region_report
from .core import DegradationConfig, PerformanceSeries, require_nonempty
from .detection import CrossValidationResult, detect_threshold

__all__ = [
    "RunReport",
    "run_detect",
    "sha256_file",
    "region_lines",
    "sensitivity_lines",
]

_PREP_RE = re.compile(r"preprocess\(removed=(\d+),merged=(\d+),over_ratio=(\d+)\)")


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return f"sha256:{digest.hexdigest()}"


def _preprocessing_summary(series: PerformanceSeries) -> dict:
    match = _PREP_RE.search(series.provenance)
    out = {
        "n_points": len(series),
        "provenance": series.provenance,
        "removed": None,
        "merged": None,
        "over_ratio": None,
    }
    if match:
        out["removed"], out["merged"], out["over_ratio"] = map(int, match.groups())
    return out


def _fmt(x, spec: str = ".4f") -> str:
    return "-" if x is None else format(x, spec)


def _pct(x) -> str:
    return "-" if x is None else f"{100 * x:.1f}%"


def region_lines(regions: RegionReport) -> list[str]:
    """Markdown table rows for a region report."""
    lines = ["| region | span | n | mean | std | min | max | r | p |"]
    lines.append("|---|---|---|---|---|---|---|---|---|")
    for st in regions.regions:
        close = "]" if st.closed else ")"
        span = f"[{_pct(st.lo)}, {_pct(st.hi)}{close}"
        lines.append(
            f"| {st.name} | {span} | {st.n} | {_fmt(st.mean)} | {_fmt(st.std)} "
            f"| {_fmt(st.minimum)} | {_fmt(st.maximum)} | {_fmt(st.r)} | {_fmt(st.r_p)} |"
        )
    if regions.t is not None:
        lines.append("")
        lines.append(
            f"Stable vs degraded: t = {_fmt(regions.t, '.2f')}, "
            f"p = {_fmt(regions.p)}, d = {_fmt(regions.cohens_d, '.2f')} "
            f"({regions.permutations} permutations)"
        )
    return lines


def sensitivity_lines(sw: SensitivityReport) -> list[str]:
    """Markdown table rows for a sensitivity sweep."""
    lines = ["| value | threshold |", "|---|---|"]
    for value, thr in zip(sw.grid, sw.thresholds):
        lines.append(f"| {value} | {_fmt(thr)} |")
    lines.append(
        f"- default threshold: {_fmt(sw.default_threshold)}; "
        f"max deviation: {_fmt(sw.max_deviation)}"
    )
    return lines


@dataclass(frozen=True)
class RunReport:
    """One full analysis run, renderable as JSON or markdown."""

    config: DegradationConfig
    preprocessing: dict
    result: CrossValidationResult
    regions: RegionReport
    sensitivity: SensitivityReport | None = None
    theory: dict | None = None
    input_digest: str | None = None
    tool_version: str = __version__

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "input_digest": self.input_digest,
            "preprocessing": self.preprocessing,
            "config": self.config.to_dict(),
            "detected": self.result.detected,
            "detection": self.result.to_dict(),
            "regions": self.regions.to_dict(),
            "sensitivity": self.sensitivity.to_dict() if self.sensitivity else None,
            "theory": self.theory,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_markdown(self) -> str:
        lines = ["# Degradation threshold report", ""]
        lines.append("## Input")
        lines.append(f"- points: {self.preprocessing['n_points']}")
        for key in ("removed", "merged", "over_ratio"):
            if self.preprocessing.get(key) is not None:
                lines.append(f"- {key}: {self.preprocessing[key]}")
        if self.input_digest:
            lines.append(f"- digest: {self.input_digest}")
        lines.append(f"- tool version: {self.tool_version}")
        lines.append("")

        res = self.result
        lines.append("## Detection")
        if res.detected:
            lines.append(
                f"- final threshold: {_fmt(res.final_threshold)} ({_pct(res.final_threshold)})"
            )
            lines.append(
                f"- spread: mean {_fmt(res.mean)}, sample std {_fmt(res.std)}, "
                f"range [{_fmt(res.minimum)}, {_fmt(res.maximum)}]"
            )
            lines.append(f"- consistency: {res.consistency}, confidence: {res.confidence}")
        else:
            lines.append("- no threshold detected")
        lines.append(f"- coverage: {_pct(res.coverage)}")
        lines.append("")
        lines.append("| method | detected | threshold | drop | note |")
        lines.append("|---|---|---|---|---|")
        for est in res.per_method:
            lines.append(
                f"| {est.method} | {'yes' if est.detected else 'no'} "
                f"| {_fmt(est.threshold_ratio)} | {_pct(est.drop_pct)} "
                f"| {est.reason or ''} |"
            )
        lines.append("")

        lines.append("## Regions")
        lines.extend(region_lines(self.regions))
        lines.append("")

        if self.sensitivity is not None:
            lines.append(f"## Sensitivity: {self.sensitivity.parameter}")
            lines.extend(sensitivity_lines(self.sensitivity))
            lines.append("")

        if self.theory is not None:
            lines.append("## Theory")
            for key in sorted(self.theory):
                value = self.theory[key]
                if isinstance(value, float):
                    lines.append(f"- {key}: {_fmt(value)} ({_pct(value)})")
                else:
                    lines.append(f"- {key}: {value}")
            lines.append("")

        return "\n".join(lines)


def run_detect(
    series: PerformanceSeries,
    cfg: DegradationConfig | None = None,
    permutations: int = 10_000,
    seed: int = 0,
    sensitivity: SensitivityReport | None = None,
    theory: dict | None = None,
    input_digest: str | None = None,
) -> RunReport:
    """Run the five methods, cross-validate, add region statistics, and
    assemble the report.  A run with no detection is still a valid report."""
    cfg = cfg or DegradationConfig()
    require_nonempty(series)
    result = detect_threshold(series, cfg)
    regions = region_report(
        series,
        list(cfg.region_boundaries),
        permutations=permutations,
        seed=seed,
    )
    return RunReport(
        config=cfg,
        preprocessing=_preprocessing_summary(series),
        result=result,
        regions=regions,
        sensitivity=sensitivity,
        theory=theory,
        input_digest=input_digest,
    )
