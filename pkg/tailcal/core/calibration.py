"""Violation counting, calibration curves and the smallest accurate delta."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal

import numpy as np
import pandas as pd

from .constants import DELTA_GRID_EXPONENTS, ETA, SHARD_SIZE
from .exceptions import RangeError, SchemaError
from .membership import FittedModel, contains_many
from .tubes import window_actions

_LOGGER = logging.getLogger(__name__)

CURVE_COLUMNS = ["delta", "expected_count", "observed_count", "ratio", "log10_ratio"]
FLOAT_FORMAT = "%.17g"

DeltaMinRule = Literal["monotone", "raw"]


@dataclass(frozen=True)
class DeltaGrid:
    """Strictly decreasing safety thresholds in (0, 1)."""

    deltas: tuple[float, ...]

    def __post_init__(self) -> None:
        """Validate ordering and range."""
        deltas = tuple(float(d) for d in self.deltas)
        object.__setattr__(self, "deltas", deltas)
        if not deltas:
            raise RangeError("a delta grid needs at least one value")
        if any(not 0.0 < d < 1.0 for d in deltas):
            raise RangeError(f"grid deltas must lie in (0, 1), got {deltas}")
        if any(a <= b for a, b in zip(deltas, deltas[1:])):
            raise RangeError("grid deltas must be strictly decreasing")

    def __iter__(self):
        return iter(self.deltas)

    def __len__(self) -> int:
        return len(self.deltas)

    @classmethod
    def from_half_decades(cls, exponents: Iterable[int] = DELTA_GRID_EXPONENTS) -> DeltaGrid:
        """10^(-k/2) for each k."""
        return cls(tuple(10.0 ** (-k / 2.0) for k in exponents))

    @classmethod
    def parse(cls, text: str) -> DeltaGrid:
        """Comma-separated deltas, or 'default'."""
        if text.strip().lower() == "default":
            return default_grid()
        try:
            values = tuple(float(part) for part in text.split(",") if part.strip())
        except ValueError as err:
            raise RangeError(f"invalid delta grid {text!r}") from err
        return cls(tuple(sorted(values, reverse=True)))

    def limited(self, smallest: float) -> DeltaGrid:
        """Grid values at or above `smallest`."""
        return DeltaGrid(tuple(d for d in self.deltas if d >= smallest))


def default_grid() -> DeltaGrid:
    """10^-1 down to 10^-8 in half decades."""
    return DeltaGrid.from_half_decades()


def count_violations(model: FittedModel, actions, delta: float, window: float | None = None,
                     sample_rate: float | None = None, workers: int = 1,
                     labels: np.ndarray | None = None) -> tuple[int, int]:
    """Count test actions leaving the model's 1 - delta region within the first window.

    Each test action is one trial: it violates at most once. The test set
    is sharded in fixed blocks and the counts are summed, so the result
    does not depend on the worker count.
    """
    actions = np.asarray(actions, dtype=float)
    if actions.ndim == 3:
        actions = window_actions(actions, window, sample_rate)
    n_test = len(actions)
    if labels is not None and len(labels) != n_test:
        raise SchemaError(f"{len(labels)} labels for {n_test} test actions")
    shards = [slice(start, min(start + SHARD_SIZE, n_test)) for start in range(0, n_test, SHARD_SIZE)]

    def run(block: slice) -> int:
        block_labels = None if labels is None else np.asarray(labels)[block]
        return int(np.count_nonzero(~contains_many(model, actions[block], delta, block_labels)))

    if workers > 1 and len(shards) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            observed = sum(pool.map(run, shards))
    else:
        observed = sum(run(block) for block in shards)
    return observed, n_test


@dataclass(frozen=True)
class CalibrationPoint:
    """Observed against expected violations at one delta."""

    delta: float
    expected_count: float
    observed_count: int
    ratio: float
    log10_ratio: float

    @classmethod
    def from_counts(cls, delta: float, observed: int, n_test: int) -> CalibrationPoint:
        expected = delta * n_test
        ratio = (observed / n_test) / delta
        log10_ratio = math.log10(ratio) if observed > 0 else -math.inf
        return cls(delta, expected, observed, ratio, log10_ratio)

    @property
    def assessable(self) -> bool:
        """At least one violation was observed."""
        return self.observed_count >= 1


@dataclass(frozen=True)
class CalibrationCurve:
    """Calibration points over a delta grid for one model and test set."""

    points: tuple[CalibrationPoint, ...]
    n_test: int
    model_class: str = ""

    @property
    def deltas(self) -> tuple[float, ...]:
        return tuple(p.delta for p in self.points)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([[getattr(p, c) for c in CURVE_COLUMNS] for p in self.points],
                            columns=CURVE_COLUMNS)

    def to_csv(self, path: Path | str) -> None:
        """Write the curve with 17 significant digits and LF line endings."""
        self.to_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")

    @classmethod
    def from_csv(cls, path: Path | str, n_test: int | None = None,
                 model_class: str = "") -> CalibrationCurve:
        """Read a curve written by to_csv."""
        frame = pd.read_csv(path, float_precision="round_trip")
        missing = [c for c in CURVE_COLUMNS if c not in frame.columns]
        if missing:
            raise SchemaError(f"calibration CSV lacks columns {missing}")
        points = tuple(
            CalibrationPoint(float(row.delta), float(row.expected_count), int(row.observed_count),
                             float(row.ratio), float(row.log10_ratio))
            for row in frame.itertuples(index=False)
        )
        if n_test is None:
            n_test = int(round(points[0].expected_count / points[0].delta)) if points else 0
        return cls(points, n_test, model_class)


def calibration_curve(model: FittedModel, actions, grid: DeltaGrid, window: float | None = None,
                      sample_rate: float | None = None, workers: int = 1,
                      labels: np.ndarray | None = None) -> CalibrationCurve:
    """One violation count per grid delta."""
    actions = np.asarray(actions, dtype=float)
    if actions.ndim == 3:
        actions = window_actions(actions, window, sample_rate)

    def evaluate(delta: float) -> CalibrationPoint:
        observed, n_test = count_violations(model, actions, delta, labels=labels)
        return CalibrationPoint.from_counts(delta, observed, n_test)

    if workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = tuple(pool.map(evaluate, grid.deltas))
    else:
        points = tuple(evaluate(delta) for delta in grid.deltas)
    curve = CalibrationCurve(points, len(actions), getattr(model, "model_class", ""))
    for point in points:
        _LOGGER.debug("delta=%-9.3g expected=%-12.1f observed=%-9d ratio=%.4g",
                      point.delta, point.expected_count, point.observed_count, point.ratio)
    return curve


@dataclass(frozen=True)
class DeltaMinResult:
    """Smallest accurate delta and the per-delta accuracy flags."""

    delta_min: float | None
    eta: float
    accurate: tuple[bool, ...]
    deltas: tuple[float, ...]
    rule: DeltaMinRule = "monotone"

    def to_dict(self) -> dict:
        return {
            "delta_min": self.delta_min,
            "eta": self.eta,
            "rule": self.rule,
            "accurate": dict(zip((repr(d) for d in self.deltas), self.accurate)),
        }


def is_accurate(point: CalibrationPoint, eta: float) -> bool:
    """|log10(expected / observed)| <= eta; zero observations never pass."""
    if point.observed_count < 1:
        return False
    return abs(math.log10(point.expected_count / point.observed_count)) <= eta


def delta_min(curve: CalibrationCurve, eta: float = ETA, rule: DeltaMinRule = "monotone") -> DeltaMinResult:
    """Smallest grid delta at which the model is still accurate.

    The monotone rule requires every larger grid delta to be accurate too;
    the raw rule takes the bare minimum over accurate deltas.
    """
    if eta <= 0:
        raise RangeError(f"eta must be positive, got {eta}")
    ordered = sorted(curve.points, key=lambda p: -p.delta)
    flags = tuple(is_accurate(p, eta) for p in ordered)
    found: float | None = None
    if rule == "monotone":
        for point, ok in zip(ordered, flags):
            if not ok:
                break
            found = point.delta
    elif rule == "raw":
        accurate = [p.delta for p, ok in zip(ordered, flags) if ok]
        found = min(accurate) if accurate else None
    else:
        raise RangeError(f"unknown delta_min rule {rule!r}")
    if found is None:
        _LOGGER.warning("No accurate delta on the grid (eta=%g)", eta)
    return DeltaMinResult(found, eta, flags, tuple(p.delta for p in ordered), rule)
