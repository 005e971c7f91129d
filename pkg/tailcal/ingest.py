"""Scenario CSV ingestion and serialisation.

Two layouts are understood. The long layout holds one row per sample
(track id, frame, x, y, optional lane, context features); tracks are cut
into fixed-length segments at a stride equal to the segment length. The
wide layout holds one scenario per row (id, x_0..x_n, y_0..y_n, lane,
features). Files are plain comma-separated numbers without quoting.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from .config import IngestSchema
from .const import LAYOUT_LONG, LAYOUT_WIDE
from .core.exceptions import DataError, SchemaError
from .core.rng import RngSpec
from .core.trajectory import Dataset, EnvironmentContext, Scenario, Trajectory, grid_steps

_LOGGER = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
# Unit separator: never present in numeric CSV text, so each physical line stays one field.
_LINE_SEP = "\x1f"


class IngestReport:
    """Class to store diagnostics collected while parsing a scenario file."""

    def __init__(self, path: str = ""):
        self.path = path
        self.rows = 0
        self.malformed_lines: list[tuple[int, str]] = []
        self.partial_segments = 0
        self.gaps = 0
        self.per_track: dict[str, int] = {}
        self.scenarios = 0

    def malformed(self, line: int, reason: str) -> None:
        """Record one rejected line."""
        self.malformed_lines.append((line, reason))
        _LOGGER.warning("%s line %d: %s", self.path, line, reason)

    def to_dict(self) -> dict[str, Any]:
        """Convert the report to a dictionary."""
        return {
            "path": self.path,
            "rows": self.rows,
            "malformed_lines": [{"line": line, "reason": reason} for line, reason in self.malformed_lines],
            "partial_segments": self.partial_segments,
            "gaps": self.gaps,
            "tracks": len(self.per_track),
            "per_track": dict(self.per_track),
            "scenarios": self.scenarios,
        }


@dataclass
class _Table:
    frame: pd.DataFrame
    lines: np.ndarray
    header: list[str] = field(default_factory=list)


def _read_table(path: Path, report: IngestReport) -> _Table:
    """Split a CSV into header and string cells, keeping physical line numbers."""
    try:
        raw = pd.read_csv(path, header=None, names=["text"], sep=_LINE_SEP, dtype=str,
                          keep_default_na=False, skip_blank_lines=False, quoting=3)
    except FileNotFoundError as err:
        raise DataError(f"scenario file {path} does not exist") from err
    except pd.errors.EmptyDataError as err:
        raise DataError(f"scenario file {path} is empty") from err
    text = raw["text"].str.rstrip("\r")
    if not len(text):
        raise DataError(f"scenario file {path} is empty")
    header = [name.strip() for name in text.iloc[0].split(",")]
    body = text.iloc[1:]
    lines = body.index.to_numpy() + 1
    blank = body.str.strip() == ""
    body, lines = body[~blank], lines[~blank.to_numpy()]
    report.rows = len(body)
    if not len(body):
        return _Table(pd.DataFrame(columns=header, dtype=str), lines, header)

    cells = body.str.split(",", expand=True)
    counts = cells.notna().sum(axis=1).to_numpy()
    good = counts == len(header)
    for line, count in zip(lines[~good], counts[~good]):
        report.malformed(int(line), f"expected {len(header)} fields, found {count}")
    cells = cells.loc[good].reindex(columns=range(len(header)))
    cells.columns = header
    if len(cells):
        cells = cells.apply(lambda col: col.astype(str).str.strip())
    return _Table(cells, lines[good], header)


def _require(table: _Table, columns: list[str]) -> None:
    missing = [c for c in columns if c not in table.header]
    if missing:
        _LOGGER.error("Scenario file lacks columns %s (has %s)", missing, table.header)
        raise SchemaError(f"missing columns: {', '.join(missing)}")


def _numeric(table: _Table, schema: IngestSchema, required: list[str],
             report: IngestReport) -> tuple[pd.DataFrame, np.ndarray]:
    """Coerce cells to floats and drop rows with unusable values."""
    frame = pd.DataFrame(index=table.frame.index)
    bad = np.zeros(len(table.frame), dtype=bool)
    reasons = np.full(len(table.frame), "", dtype=object)
    for column in required + list(schema.features):
        cells = table.frame[column]
        values = pd.to_numeric(cells, errors="coerce").to_numpy(dtype=float)
        if column in schema.features:
            values = np.where(cells.to_numpy() == "", schema.sentinel, values)
        invalid = ~np.isfinite(values)
        if column in schema.features and np.isnan(schema.sentinel):
            invalid &= cells.to_numpy() != ""
        reasons = np.where(invalid & ~bad, f"invalid value in column {column!r}", reasons)
        bad |= invalid
        frame[column] = values
    if schema.lane and schema.lane in table.header:
        cells = table.frame[schema.lane].to_numpy()
        lane = pd.to_numeric(table.frame[schema.lane], errors="coerce").to_numpy(dtype=float)
        whole = np.isfinite(lane) & (lane == np.round(np.where(np.isfinite(lane), lane, 0.0)))
        invalid = (cells != "") & ~whole
        reasons = np.where(invalid & ~bad, f"lane in column {schema.lane!r} is not an integer", reasons)
        bad |= invalid
        frame[schema.lane] = np.where(whole, lane, np.nan)
    for line, reason in zip(table.lines[bad], reasons[bad]):
        report.malformed(int(line), reason)
    return frame.loc[~bad], table.lines[~bad]


def _label(value: float) -> int | None:
    return int(value) if np.isfinite(value) else None


def _context(row_features: np.ndarray, schema: IngestSchema) -> EnvironmentContext:
    return EnvironmentContext(row_features, schema.sentinel)


def _ingest_long(table: _Table, schema: IngestSchema, source: str, report: IngestReport) -> list[Scenario]:
    required = [schema.track, schema.frame, schema.x, schema.y]
    _require(table, required + list(schema.features))
    frame, _ = _numeric(table, schema, required, report)
    has_lane = bool(schema.lane) and schema.lane in table.header
    if schema.lane and not has_lane:
        _LOGGER.warning("Lane column %r not found; scenarios carry no mode label", schema.lane)

    stride = grid_steps(schema.segment_seconds, schema.sample_rate)
    frame = frame.sort_values([schema.track, schema.frame], kind="stable")
    scenarios: list[Scenario] = []
    for track, rows in frame.groupby(schema.track, sort=True):
        frames = rows[schema.frame].to_numpy()
        duplicated = np.r_[False, frames[1:] == frames[:-1]]
        if duplicated.any():
            _LOGGER.warning("Track %s has %d duplicated frames; keeping the first", track, int(duplicated.sum()))
            rows, frames = rows.loc[~duplicated], frames[~duplicated]
        positions = rows[[schema.x, schema.y]].to_numpy()
        features = rows[list(schema.features)].to_numpy() if schema.features else np.zeros((len(rows), 0))
        lanes = rows[schema.lane].to_numpy() if has_lane else np.full(len(rows), np.nan)

        breaks = np.flatnonzero(np.diff(frames) != 1) + 1
        report.gaps += len(breaks)
        count = 0
        for run in np.split(np.arange(len(rows)), breaks):
            start = 0
            while start + stride < len(run):
                segment = run[start:start + stride + 1]
                first = segment[0]
                scenarios.append(Scenario(
                    Trajectory(positions[segment], schema.sample_rate, schema.segment_seconds,
                               frames[first] / schema.sample_rate),
                    _context(features[first], schema),
                    mode_label=_label(lanes[segment[-1]]),
                    source=source,
                    record_index=len(scenarios),
                ))
                count += 1
                start += stride
            if start < len(run) - 1:
                report.partial_segments += 1
        report.per_track[f"{track:g}"] = count
    return scenarios


def _ingest_wide(table: _Table, schema: IngestSchema, source: str, report: IngestReport) -> list[Scenario]:
    samples = grid_steps(schema.segment_seconds, schema.sample_rate) + 1
    coords = schema.wide_columns(samples)
    _require(table, [schema.track] + coords + list(schema.features))
    frame, _ = _numeric(table, schema, [schema.track] + coords, report)
    has_lane = bool(schema.lane) and schema.lane in table.header

    xy = frame[coords].to_numpy().reshape(len(frame), 2, samples).transpose(0, 2, 1)
    features = frame[list(schema.features)].to_numpy() if schema.features else np.zeros((len(frame), 0))
    lanes = frame[schema.lane].to_numpy() if has_lane else np.full(len(frame), np.nan)
    ids = frame[schema.track].to_numpy()
    scenarios = []
    for i in np.argsort(ids, kind="stable"):
        scenarios.append(Scenario(
            Trajectory(xy[i], schema.sample_rate, schema.segment_seconds),
            _context(features[i], schema),
            mode_label=_label(lanes[i]),
            source=source,
            record_index=len(scenarios),
        ))
        report.per_track[f"{ids[i]:g}"] = 1
    return scenarios


def read_scenarios(path: Path | str, schema: IngestSchema, role: str = "train") -> tuple[Dataset, IngestReport]:
    """Parse a scenario file; return the dataset and the parse diagnostics."""
    path = Path(path)
    report = IngestReport(str(path))
    _LOGGER.debug("Reading %s scenarios from %s", schema.layout, path)
    table = _read_table(path, report)
    if schema.layout == LAYOUT_LONG:
        scenarios = _ingest_long(table, schema, path.name, report)
    elif schema.layout == LAYOUT_WIDE:
        scenarios = _ingest_wide(table, schema, path.name, report)
    else:
        raise SchemaError(f"unknown layout {schema.layout!r}")
    report.scenarios = len(scenarios)
    _LOGGER.debug("Ingest diagnostics: %s", report.to_dict())
    if not scenarios:
        _LOGGER.error("No usable scenarios in %s", path)
        raise DataError(f"no usable scenarios in {path}", report.to_dict())
    return Dataset(tuple(scenarios), role, schema.sentinel), report


def ingest_scenarios(path: Path | str, schema: IngestSchema) -> Dataset:
    """One Scenario per fixed-length record group of a CSV file."""
    dataset, _ = read_scenarios(path, schema)
    return dataset


def write_scenarios(dataset: Dataset, path: Path | str, schema: IngestSchema) -> None:
    """Write a dataset in the schema's layout so that re-ingesting it is lossless."""
    if dataset.context_dim is not None and dataset.context_dim != len(schema.features):
        raise SchemaError(f"dataset has {dataset.context_dim} context features, "
                          f"schema names {len(schema.features)}")
    lane = schema.lane or "lane"
    if schema.layout == LAYOUT_WIDE:
        samples = grid_steps(schema.segment_seconds, schema.sample_rate) + 1
        records = []
        for scenario in dataset:
            positions = scenario.trajectory.positions
            if len(positions) != samples:
                raise SchemaError(f"scenario has {len(positions)} samples, layout expects {samples}")
            records.append([scenario.record_index, *positions[:, 0], *positions[:, 1],
                            scenario.mode_label, *scenario.context.features])
        columns = [schema.track, *schema.wide_columns(samples), lane, *schema.features]
        frame = pd.DataFrame(records, columns=columns)
    else:
        parts = []
        for scenario in dataset:
            trajectory = scenario.trajectory
            n = len(trajectory)
            first = int(round(trajectory.start_time * trajectory.sample_rate))
            part = pd.DataFrame({
                schema.track: np.full(n, scenario.record_index),
                schema.frame: np.arange(first, first + n),
                schema.x: trajectory.positions[:, 0],
                schema.y: trajectory.positions[:, 1],
                lane: pd.array([scenario.mode_label] * n, dtype="Int64"),
            })
            for name, value in zip(schema.features, scenario.context.features):
                part[name] = value
            parts.append(part)
        frame = pd.concat(parts, ignore_index=True) if parts else pd.DataFrame()
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    _LOGGER.debug("Wrote %d scenarios to %s", len(dataset), path)


def split_train_test(dataset: Dataset, test_fraction: float, rng: RngSpec) -> tuple[Dataset, Dataset]:
    """Random scenario-level split; the permutation comes from rng."""
    order = rng.generator().permutation(len(dataset))
    n_test = max(1, int(round(test_fraction * len(dataset))))
    if n_test >= len(dataset):
        raise DataError(f"cannot hold out {n_test} of {len(dataset)} scenarios")
    test = dataset.subset(np.sort(order[:n_test]), role="test")
    train = dataset.subset(np.sort(order[n_test:]), role="train")
    return train, test
