"""Gaussian and noisy-rational uncertainty models."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np
import scipy.linalg
import scipy.special
import scipy.stats

from .exceptions import DegeneracyError, RangeError, SizeError

_LOGGER = logging.getLogger(__name__)

ModelClass = Literal["gaussian", "noisy_rational"]
Region = Literal["per_step", "joint"]

# Smallest eigenvalue relative to the largest before a covariance counts as singular.
_CONDITION_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class GaussianModel:
    """A d-dimensional Gaussian with a Cholesky-validated covariance."""

    mean: np.ndarray
    cov: np.ndarray
    n_samples: int = 0
    model_class: ModelClass = "gaussian"
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Validate the covariance and cache its Cholesky factor."""
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float).reshape(mean.shape[0], mean.shape[0])
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise DegeneracyError("Gaussian parameters must be finite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "chol", cholesky_or_raise(cov))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def mahalanobis2(self, points: np.ndarray) -> np.ndarray:
        """Squared Mahalanobis distance of each row to the mean."""
        points = np.asarray(points, dtype=float).reshape(-1, self.dim)
        solved = scipy.linalg.solve_triangular(self.chol, (points - self.mean).T, lower=True)
        return np.sum(solved * solved, axis=0)

    def logpdf(self, points: np.ndarray) -> np.ndarray:
        """Log density of each row."""
        log_det = 2.0 * np.sum(np.log(np.diag(self.chol)))
        return -0.5 * (self.dim * math.log(2.0 * math.pi) + log_det + self.mahalanobis2(points))

    def sample(self, n: int, gen: np.random.Generator) -> np.ndarray:
        """Draw n rows from the model."""
        return self.mean + gen.standard_normal((n, self.dim)) @ self.chol.T


def cholesky_or_raise(cov: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, or DegeneracyError for singular covariances."""
    eigenvalues = np.linalg.eigvalsh(cov)
    diagnostics = {"eigenvalues": eigenvalues.tolist()}
    if eigenvalues[0] <= _CONDITION_FLOOR * max(eigenvalues[-1], 0.0) or eigenvalues[-1] <= 0:
        raise DegeneracyError("covariance is singular", diagnostics)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as err:
        raise DegeneracyError("covariance is not positive definite", diagnostics) from err


def _as_rows(points) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    return points.reshape(-1, 1) if points.ndim == 1 else points


def fit_gaussian(points, model_class: ModelClass = "gaussian") -> GaussianModel:
    """Maximum-likelihood Gaussian (1/n covariance normalization)."""
    points = _as_rows(points)
    n, d = points.shape
    if n < d + 1:
        raise SizeError(f"need at least {d + 1} points to fit a {d}-d Gaussian, got {n}")
    mean = points.mean(axis=0)
    centered = points - mean
    cov = centered.T @ centered / n
    metadata = {"beta": "absorbed into covariance scale"} if model_class == "noisy_rational" else {}
    model = GaussianModel(mean, cov, n, model_class, metadata)
    _LOGGER.debug("Fitted %s on %d points: mean=%s", model_class, n, mean)
    return model


def fit_noisy_rational(points) -> GaussianModel:
    """Noisy-rational action model under a quadratic cost.

    When the cost of an action is its squared Mahalanobis distance to the
    best-fit action, the Boltzmann policy is a Gaussian. The rationality
    coefficient cannot be identified separately and is absorbed into the
    covariance scale.
    """
    return fit_gaussian(points, model_class="noisy_rational")


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise RangeError(f"delta must lie in (0, 1), got {delta}")


def gaussian_region_radius(model: GaussianModel | int, delta: float) -> float:
    """Mahalanobis radius whose ball carries Gaussian mass 1 - delta."""
    _check_delta(delta)
    dim = model if isinstance(model, int) else model.dim
    if dim == 2:
        return math.sqrt(-2.0 * math.log(delta))
    return math.sqrt(float(scipy.stats.chi2.isf(delta, dim)))


def gaussian_two_sided_tail(radius: float) -> float:
    """Mass of a 1D Gaussian beyond +-radius standard deviations."""
    return float(scipy.special.erfc(radius / math.sqrt(2.0)))


def two_sided_radius(delta: float) -> float:
    """Number of standard deviations leaving two-sided tail mass delta."""
    _check_delta(delta)
    return float(math.sqrt(2.0) * scipy.special.erfcinv(delta))


@dataclass(frozen=True, eq=False)
class ActionGaussian:
    """Gaussian model over windowed actions.

    Per step: one 2D Gaussian per timestep; an action is inside the
    delta-region when every timestep deviation is inside its own
    Mahalanobis ellipse. Joint: one Gaussian over the flattened window,
    tested against the chi-square radius with 2T degrees of freedom.
    """

    steps: tuple[GaussianModel, ...]
    region: Region = "per_step"
    model_class: ModelClass = "gaussian"

    @property
    def n_steps(self) -> int:
        return len(self.steps) if self.region == "per_step" else self.steps[0].dim // 2

    def means(self) -> np.ndarray:
        """Per-timestep centre line as (T, 2)."""
        if self.region == "joint":
            return self.steps[0].mean.reshape(-1, 2)
        return np.stack([step.mean for step in self.steps])

    def marginal_sigmas(self) -> np.ndarray:
        """Per-timestep standard deviations of each axis as (T, 2)."""
        if self.region == "joint":
            return np.sqrt(np.diag(self.steps[0].cov)).reshape(-1, 2)
        return np.stack([np.sqrt(np.diag(step.cov)) for step in self.steps])


def fit_action_gaussian(actions: np.ndarray, region: Region = "per_step",
                        model_class: ModelClass = "gaussian") -> ActionGaussian:
    """Fit a Gaussian action model on (N, T, 2) windowed actions."""
    actions = np.asarray(actions, dtype=float)
    if region == "joint":
        steps = (fit_gaussian(actions.reshape(len(actions), -1), model_class),)
    elif region == "per_step":
        steps = tuple(fit_gaussian(actions[:, t, :], model_class) for t in range(actions.shape[1]))
    else:
        raise RangeError(f"unknown Gaussian region mode {region!r}")
    return ActionGaussian(steps, region, model_class)
