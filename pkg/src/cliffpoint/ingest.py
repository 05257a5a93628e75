"""Record ingestion: CSV/JSONL files to a preprocessed series.

Records carry id, token_count, ratio, performance, prediction, reference.
Exactly one of token_count/ratio must be present; performance is either
given or computed from the prediction/reference pair.  Validation failures
name the offending physical line.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .core import DegradationConfig, PerformanceSeries, SampleRecord, compute_ratio, preprocess
from .errors import IngestError, InvalidReferenceError
from .scoring import dual_f1

__all__ = ["FORMATS", "read_records", "resolve_records", "ingest_records"]

FORMATS = ("csv", "jsonl")

_COLUMNS = ("id", "token_count", "ratio", "performance", "prediction", "reference")


def _parse_int(value, line: int, column: str) -> int:
    try:
        out = int(value)
    except (TypeError, ValueError):
        raise IngestError(f"line {line}: {column} must be an integer, got {value!r}") from None
    if out < 0:
        raise IngestError(f"line {line}: {column} must be nonnegative, got {out}")
    return out


def _parse_unit(value, line: int, column: str) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise IngestError(f"line {line}: {column} must be a number, got {value!r}") from None
    if not (0.0 <= out <= 1.0):
        raise IngestError(f"line {line}: {column} must be in [0, 1], got {out}")
    return out


def _build_record(raw: dict, line: int, ordinal: int) -> SampleRecord:
    rid = raw.get("id")
    rid = str(rid) if rid not in (None, "") else f"row{ordinal}"
    token_count = raw.get("token_count")
    ratio = raw.get("ratio")
    if token_count is not None and ratio is not None:
        raise IngestError(f"line {line}: provide token_count or ratio, not both")
    if token_count is None and ratio is None:
        raise IngestError(f"line {line}: record needs token_count or ratio")
    performance = raw.get("performance")
    prediction = raw.get("prediction")
    reference = raw.get("reference")
    if performance is None and (prediction is None or reference is None):
        raise IngestError(
            f"line {line}: record needs performance or both prediction and reference"
        )
    return SampleRecord(
        id=rid,
        token_count=_parse_int(token_count, line, "token_count") if token_count is not None else None,
        ratio=_parse_unit(ratio, line, "ratio") if ratio is not None else None,
        performance=_parse_unit(performance, line, "performance") if performance is not None else None,
        prediction=str(prediction) if prediction is not None else None,
        reference=str(reference) if reference is not None else None,
    )


def _read_csv(path: Path) -> list[tuple[int, SampleRecord]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise IngestError(f"{path}: empty file, expected a header row")
        known = [c for c in header if c in _COLUMNS]
        if not any(c in known for c in ("token_count", "ratio")):
            raise IngestError(
                f"{path}: header must include token_count or ratio, got {header}"
            )
        out = []
        for row in reader:
            # empty cell = absent
            raw = {k: v for k, v in row.items() if k in _COLUMNS and v not in (None, "")}
            out.append((reader.line_num, _build_record(raw, reader.line_num, len(out) + 1)))
    return out


def _read_jsonl(path: Path) -> list[tuple[int, SampleRecord]]:
    out = []
    with open(path) as fh:
        for line_num, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"{path}:{line_num}: invalid JSON ({exc.msg})") from None
            if not isinstance(raw, dict):
                raise IngestError(f"{path}:{line_num}: expected an object per line")
            raw = {k: v for k, v in raw.items() if k in _COLUMNS and v is not None}
            out.append((line_num, _build_record(raw, line_num, len(out) + 1)))
    return out


def read_records(path: str | Path, format: str = "csv") -> list[tuple[int, SampleRecord]]:
    """Parse a record file into (line_number, record) pairs."""
    path = Path(path)
    if format not in FORMATS:
        raise IngestError(f"format must be one of {FORMATS}, got {format!r}")
    if not path.exists():
        raise IngestError(f"{path}: no such file")
    records = _read_csv(path) if format == "csv" else _read_jsonl(path)
    if not records:
        raise IngestError(f"{path}: no records found")
    return records


def resolve_records(
    records: list[tuple[int, SampleRecord]],
    cfg: DegradationConfig | None = None,
    provenance: str = "records",
) -> PerformanceSeries:
    """Turn parsed records into a raw series.

    Missing ratios derive from token_count / t_max; missing performances are
    scored from the prediction/reference texts.  The provenance notes how
    many records each rule touched.
    """
    cfg = cfg or DegradationConfig()
    ratios = []
    perfs = []
    derived = scored = 0
    for line, rec in records:
        if rec.ratio is not None:
            ratios.append(rec.ratio)
        else:
            ratios.append(compute_ratio(rec.token_count, cfg.t_max))
            derived += 1
        if rec.performance is not None:
            perfs.append(rec.performance)
        else:
            try:
                perfs.append(dual_f1(rec.prediction, rec.reference).f1)
            except InvalidReferenceError:
                raise IngestError(
                    f"line {line}: reference for {rec.id!r} normalizes to empty text"
                ) from None
            scored += 1
    return PerformanceSeries(
        ratios,
        perfs,
        provenance=f"{provenance}(n={len(records)},derived_ratio={derived},scored={scored})",
    )


def ingest_records(
    path: str | Path, format: str = "csv", cfg: DegradationConfig | None = None
) -> PerformanceSeries:
    """Read, resolve, and preprocess a record file into a detection-ready series."""
    records = read_records(path, format)
    raw = resolve_records(records, cfg, provenance=f"ingest({Path(path).name})")
    return preprocess(raw)
