"""Data-requirement scaling: log-log fits of delta_min against N, and the VC comparator."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
import scipy.stats

from .exceptions import DegeneracyError, RangeError, SchemaError

_LOGGER = logging.getLogger(__name__)

SCALING_COLUMNS = ["n_train", "delta_min"]

# 10 s of highway driving at about 30 m/s.
KM_PER_TRAJECTORY = 0.3


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares line through (log10 N, log10 delta_min)."""

    n_train: tuple[float, ...]
    delta_min: tuple[float, ...]
    slope: float
    intercept: float
    r2: float

    def predict(self, n: float) -> float:
        """delta_min the line predicts for N training trajectories."""
        return 10.0 ** (self.intercept + self.slope * math.log10(n))

    def extrapolate(self, delta_target: float) -> float:
        """Training trajectories the line needs to reach delta_target."""
        if not 0.0 < delta_target < 1.0:
            raise RangeError(f"delta_target must lie in (0, 1), got {delta_target}")
        return 10.0 ** ((math.log10(delta_target) - self.intercept) / self.slope)

    def extrapolate_distance_km(self, delta_target: float,
                                km_per_trajectory: float = KM_PER_TRAJECTORY) -> float:
        """Driving distance, in kilometres, holding the extrapolated trajectory count."""
        if km_per_trajectory <= 0:
            raise RangeError(f"km_per_trajectory must be positive, got {km_per_trajectory}")
        return self.extrapolate(delta_target) * km_per_trajectory

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2,
                "points": [[n, d] for n, d in zip(self.n_train, self.delta_min)]}

    def to_csv(self, path: Path | str) -> None:
        """Write the fitted points as n_train, delta_min."""
        frame = pd.DataFrame({"n_train": self.n_train, "delta_min": self.delta_min})
        frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")


def scaling_fit(points: Sequence[tuple[float, float]]) -> ScalingFit:
    """Fit log10 delta_min = intercept + slope * log10 N."""
    if len(points) < 3:
        raise RangeError(f"a scaling fit needs at least 3 points, got {len(points)}")
    data = np.asarray(points, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise SchemaError(f"scaling points must be (N, delta_min) pairs, got shape {data.shape}")
    if np.any(data <= 0) or not np.all(np.isfinite(data)):
        raise RangeError("scaling points must be finite and positive")
    x, y = np.log10(data[:, 0]), np.log10(data[:, 1])
    if np.ptp(x) == 0:
        raise DegeneracyError("scaling points need at least two distinct N", {"n_train": data[:, 0].tolist()})
    fit = scipy.stats.linregress(x, y)
    r2 = float(min(1.0, max(0.0, fit.rvalue ** 2))) if np.ptp(y) > 0 else 1.0
    if fit.slope == 0:
        raise DegeneracyError("delta_min does not change with N", {"delta_min": data[:, 1].tolist()})
    result = ScalingFit(tuple(data[:, 0]), tuple(data[:, 1]), float(fit.slope), float(fit.intercept), r2)
    _LOGGER.debug("Scaling fit: slope=%.4f intercept=%.4f r2=%.4f", result.slope, result.intercept, r2)
    return result


def read_scaling_csv(path: Path | str) -> list[tuple[float, float]]:
    """(N, delta_min) pairs from a scaling CSV."""
    frame = pd.read_csv(path, float_precision="round_trip")
    missing = [c for c in SCALING_COLUMNS if c not in frame.columns]
    if missing:
        raise SchemaError(f"scaling CSV lacks columns {missing}")
    return [(float(n), float(d)) for n, d in zip(frame["n_train"], frame["delta_min"])]


@dataclass(frozen=True)
class VcBoundQuery:
    """Inputs of the sample-count lower bound expression."""

    delta: float
    vcdim: int
    c1: float = 1.0
    c2: float = 1.0

    def __post_init__(self) -> None:
        """Validate the query."""
        if not 0.0 < self.delta < 1.0:
            raise RangeError(f"delta must lie in (0, 1), got {self.delta}")
        if self.vcdim < 1:
            raise RangeError(f"vcdim must be at least 1, got {self.vcdim}")
        if self.c1 <= 0 or self.c2 <= 0:
            raise RangeError("bound constants must be positive")


def vc_lower_bound(query: VcBoundQuery) -> float:
    """c1 (1/delta) ln(1/delta) + c2 VCdim / delta.

    An order-of-magnitude comparator with unit constants, not a certified
    bound.
    """
    inverse = 1.0 / query.delta
    return query.c1 * inverse * math.log(inverse) + query.c2 * query.vcdim * inverse
