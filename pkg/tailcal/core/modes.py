"""Static two-mode Bayes classification and confident decision intervals."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.special

from .constants import INTERVAL_TOL, MIN_INTERVAL_GRID
from .exceptions import DegeneracyError, RangeError
from .gaussian import GaussianModel, _check_delta, fit_gaussian

_LOGGER = logging.getLogger(__name__)

Label = Literal["mode1", "mode2", "gray"]


@dataclass(frozen=True, eq=False)
class TwoModeClassifier:
    """Two 1D Gaussian mode fits under a uniform prior."""

    mode1: GaussianModel
    mode2: GaussianModel
    model_class: str = "two_mode"

    def __post_init__(self) -> None:
        """Both modes must be one-dimensional."""
        if self.mode1.dim != 1 or self.mode2.dim != 1:
            raise RangeError("two-mode classifier takes 1D mode models")

    @property
    def means(self) -> tuple[float, float]:
        return float(self.mode1.mean[0]), float(self.mode2.mean[0])

    @property
    def sigmas(self) -> tuple[float, float]:
        return float(np.sqrt(self.mode1.cov[0, 0])), float(np.sqrt(self.mode2.cov[0, 0]))


def fit_two_mode_classifier(points1, points2) -> TwoModeClassifier:
    """Fit one Gaussian per labelled mode."""
    fits = []
    for name, points in (("mode1", points1), ("mode2", points2)):
        points = np.asarray(points, dtype=float).reshape(-1)
        if len(points) < 2:
            raise DegeneracyError(f"{name} needs at least 2 points, got {len(points)}",
                                  {"mode": name, "count": len(points)})
        fits.append(fit_gaussian(points))
    classifier = TwoModeClassifier(*fits)
    _LOGGER.debug("Two-mode fit: means %s, sigmas %s", classifier.means, classifier.sigmas)
    return classifier


def mode_log_odds(classifier: TwoModeClassifier, x) -> np.ndarray:
    """log p2(x) - log p1(x), elementwise."""
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1, 1)
    odds = classifier.mode2.logpdf(flat) - classifier.mode1.logpdf(flat)
    return odds.reshape(x.shape)


def mode_posterior(classifier: TwoModeClassifier, x):
    """Posterior (p1, p2) of each mode given x under a uniform prior."""
    odds = mode_log_odds(classifier, x)
    p1, p2 = scipy.special.expit(-odds), scipy.special.expit(odds)
    if np.ndim(odds) == 0:
        return float(p1), float(p2)
    return p1, p2


@dataclass(frozen=True)
class DecisionIntervals:
    """Partition of [lo, hi] into confident mode regions and the gray region."""

    mode1: tuple[tuple[float, float], ...]
    mode2: tuple[tuple[float, float], ...]
    gray: tuple[tuple[float, float], ...]
    delta: float
    bounds: tuple[float, float]

    def rows(self) -> list[tuple[str, float, float]]:
        """Intervals of every label ordered by start."""
        rows = [(label, a, b) for label in ("mode1", "mode2", "gray")
                for a, b in getattr(self, label)]
        return sorted(rows, key=lambda row: (row[1], row[2]))

    def length(self, label: Label) -> float:
        """Total length of one label's intervals."""
        return float(sum(b - a for a, b in getattr(self, label)))

    def coverage(self, label: Label) -> float:
        """Fraction of [lo, hi] taken by one label."""
        lo, hi = self.bounds
        return self.length(label) / (hi - lo)


def _label_codes(classifier: TwoModeClassifier, x: np.ndarray, level: float) -> np.ndarray:
    """0 gray, 1 mode1, 2 mode2; mode1 wins when both pass."""
    odds = mode_log_odds(classifier, x)
    return np.where(-odds >= level, 1, np.where(odds >= level, 2, 0))


def decision_intervals(classifier: TwoModeClassifier, delta: float, lo: float, hi: float,
                       grid: int = MIN_INTERVAL_GRID) -> DecisionIntervals:
    """Where an observation is attributed to one mode with posterior at least 1 - delta.

    Labels are computed on a uniform grid; every label change is refined
    by bisection to INTERVAL_TOL in x. The three interval sets cover
    [lo, hi] exactly.
    """
    _check_delta(delta)
    if not lo < hi:
        raise RangeError(f"need lo < hi, got ({lo}, {hi})")
    if grid < MIN_INTERVAL_GRID:
        raise RangeError(f"grid needs at least {MIN_INTERVAL_GRID} points, got {grid}")
    # p_i >= 1 - delta  <=>  log-odds in favour of i >= logit(1 - delta)
    level = float(scipy.special.logit(1.0 - delta))
    xs = np.linspace(lo, hi, grid)
    codes = _label_codes(classifier, xs, level)

    cuts: list[float] = [lo]
    run_codes: list[int] = [int(codes[0])]
    for i in np.flatnonzero(codes[1:] != codes[:-1]):
        left, right = float(xs[i]), float(xs[i + 1])
        code = int(codes[i])
        while right - left > INTERVAL_TOL:
            mid = 0.5 * (left + right)
            if _label_codes(classifier, np.array([mid]), level)[0] == code:
                left = mid
            else:
                right = mid
        cuts.append(0.5 * (left + right))
        run_codes.append(int(codes[i + 1]))
    cuts.append(hi)

    sets: dict[int, list[tuple[float, float]]] = {0: [], 1: [], 2: []}
    for code, start, end in zip(run_codes, cuts[:-1], cuts[1:]):
        sets[code].append((start, end))
    result = DecisionIntervals(tuple(sets[1]), tuple(sets[2]), tuple(sets[0]), delta, (lo, hi))
    _LOGGER.debug("Decision intervals at delta=%g: gray covers %.4f of [%g, %g]",
                  delta, result.coverage("gray"), lo, hi)
    return result
