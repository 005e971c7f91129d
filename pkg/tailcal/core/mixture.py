"""Gaussian mixture models fitted by EM, with highest-density regions."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from threading import Lock
from typing import Any

import numpy as np
import scipy.special

from .constants import (
    EM_COV_FLOOR,
    EM_MAX_ITER,
    EM_RESTARTS,
    EM_TOL,
    MC_MIN_SAMPLES,
    MC_MIN_TAIL,
    MC_SAMPLES,
    WEIGHT_SUM_TOL,
)
from .exceptions import DegeneracyError, RangeError, ResolutionError, SizeError
from .gaussian import GaussianModel, _as_rows, _check_delta
from .rng import RngSpec

_LOGGER = logging.getLogger(__name__)

# Allowed log-likelihood decrease per EM iteration, relative, from rounding.
_MONOTONE_RTOL = 1e-10


@dataclass(frozen=True)
class EmConfig:
    """EM stopping rule, restarts and covariance floor."""

    tol: float = EM_TOL
    max_iter: int = EM_MAX_ITER
    restarts: int = EM_RESTARTS
    cov_floor: float = EM_COV_FLOOR
    workers: int = 1


@dataclass(frozen=True)
class EmDiagnostics:
    """Outcome of the selected EM restart."""

    iterations: int
    log_likelihood: float
    restart: int
    converged: bool
    ll_history: tuple[float, ...] = ()
    decreases: tuple[int, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "iterations": self.iterations,
            "log_likelihood": self.log_likelihood,
            "restart": self.restart,
            "converged": self.converged,
            "decreases": list(self.decreases),
        }


@dataclass(frozen=True, eq=False)
class GmmModel:
    """K-component Gaussian mixture."""

    weights: np.ndarray
    components: tuple[GaussianModel, ...]
    diagnostics: EmDiagnostics | None = None
    rng: RngSpec | None = None
    mc_samples: int = MC_SAMPLES
    _thresholds: dict[float, float] = field(default_factory=dict, repr=False)
    _lock: Lock = field(default_factory=Lock, repr=False)

    def __post_init__(self) -> None:
        """Validate the mixture weights."""
        weights = np.array(self.weights, dtype=float).reshape(-1)
        object.__setattr__(self, "weights", weights)
        if len(weights) != len(self.components) or len(weights) < 1:
            raise RangeError("a mixture needs one weight per component and K >= 1")
        if np.any(weights <= 0) or abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise DegeneracyError("mixture weights must be positive and sum to 1",
                                  {"weights": weights.tolist()})

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @property
    def means(self) -> np.ndarray:
        return np.stack([c.mean for c in self.components])

    @property
    def covs(self) -> np.ndarray:
        return np.stack([c.cov for c in self.components])

    def component_logpdf(self, points: np.ndarray) -> np.ndarray:
        """(n, K) matrix of log w_k + log N(x | k)."""
        return np.column_stack([
            math.log(w) + c.logpdf(points) for w, c in zip(self.weights, self.components)
        ])

    def logpdf(self, points: np.ndarray) -> np.ndarray:
        """Log mixture density of each row."""
        return scipy.special.logsumexp(self.component_logpdf(points), axis=1)

    def sample(self, n: int, gen: np.random.Generator) -> np.ndarray:
        """Draw n rows from the mixture."""
        labels = gen.choice(self.k, size=n, p=self.weights)
        z = gen.standard_normal((n, self.dim))
        out = np.empty((n, self.dim))
        for k, component in enumerate(self.components):
            rows = labels == k
            out[rows] = component.mean + z[rows] @ component.chol.T
        return out

    def log_threshold(self, delta: float) -> float:
        """Cached log density threshold of the (1 - delta) highest-density region."""
        with self._lock:
            cached = self._thresholds.get(delta)
        if cached is not None:
            return cached
        if self.rng is None:
            raise RangeError("model has no RngSpec for its Monte-Carlo threshold")
        value = math.log(gmm_density_threshold(self, delta, self.mc_samples, self.rng))
        with self._lock:
            return self._thresholds.setdefault(delta, value)


def _floor_covariance(cov: np.ndarray, floor: float) -> np.ndarray:
    """Clip eigenvalues from below at `floor`; untouched when already above."""
    cov = 0.5 * (cov + cov.T)
    eigenvalues, vectors = np.linalg.eigh(cov)
    if eigenvalues[0] >= floor:
        return cov
    return (vectors * np.maximum(eigenvalues, floor)) @ vectors.T


def _kmeans_pp(points: np.ndarray, k: int, gen: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: centres drawn proportional to squared distance."""
    n = len(points)
    centres = [points[gen.integers(n)]]
    dist2 = np.sum((points - centres[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = dist2.sum()
        index = gen.choice(n, p=dist2 / total) if total > 0 else gen.integers(n)
        centres.append(points[index])
        dist2 = np.minimum(dist2, np.sum((points - points[index]) ** 2, axis=1))
    return np.stack(centres)


def _initial_mixture(points: np.ndarray, k: int, gen: np.random.Generator,
                     floor: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n, d = points.shape
    centres = _kmeans_pp(points, k, gen)
    labels = np.argmin(((points[:, None, :] - centres[None, :, :]) ** 2).sum(axis=2), axis=1)
    global_cov = np.cov(points.T, bias=True).reshape(d, d)
    weights = np.empty(k)
    means = np.empty((k, d))
    covs = np.empty((k, d, d))
    for j in range(k):
        members = points[labels == j]
        weights[j] = max(len(members), 1) / n
        means[j] = members.mean(axis=0) if len(members) else centres[j]
        cov = np.cov(members.T, bias=True).reshape(d, d) if len(members) > d else global_cov
        covs[j] = _floor_covariance(cov, floor)
    return weights / weights.sum(), means, covs


def _build(weights, means, covs) -> GmmModel:
    components = tuple(GaussianModel(m, c) for m, c in zip(means, covs))
    return GmmModel(weights, components)


def em_step_status(history: list[float], ll: float, tol: float) -> str:
    """Classify a new mean log-likelihood against the previous one.

    "decreased" when it fell by more than rounding, "converged" when it rose
    by less than tol, otherwise "continue".
    """
    if not history:
        return "continue"
    previous = history[-1]
    if ll < previous - _MONOTONE_RTOL * max(1.0, abs(previous)):
        return "decreased"
    if ll - previous < tol:
        return "converged"
    return "continue"


def _run_em(points: np.ndarray, k: int, cfg: EmConfig, restart: int,
            rng: RngSpec) -> tuple[GmmModel, EmDiagnostics] | None:
    """One EM run; None when a component collapses."""
    n, d = points.shape
    gen = rng.child(restart).generator()
    weights, means, covs = _initial_mixture(points, k, gen, cfg.cov_floor)
    history: list[float] = []
    decreases: list[int] = []
    converged = False
    try:
        model = _build(weights, means, covs)
        for iteration in range(1, cfg.max_iter + 1):
            log_joint = model.component_logpdf(points)
            log_norm = scipy.special.logsumexp(log_joint, axis=1)
            ll = float(log_norm.mean())
            status = em_step_status(history, ll, cfg.tol)
            history.append(ll)
            if status == "decreased":
                _LOGGER.warning("EM log-likelihood decreased at iteration %d: %.17g -> %.17g",
                                iteration, history[-2], ll)
                decreases.append(iteration)
            elif status == "converged":
                converged = True
                break

            resp = np.exp(log_joint - log_norm[:, None])
            counts = resp.sum(axis=0)
            if np.any(counts <= d):
                raise DegeneracyError("mixture component collapsed",
                                      {"component_counts": counts.tolist(), "iteration": iteration})
            weights = counts / n
            means = (resp.T @ points) / counts[:, None]
            for j in range(k):
                centered = points - means[j]
                covs[j] = _floor_covariance((resp[:, j, None] * centered).T @ centered / counts[j],
                                            cfg.cov_floor)
            model = _build(weights, means, covs)
    except DegeneracyError as err:
        _LOGGER.warning("EM restart %d failed: %s %s", restart, err, err.diagnostics)
        return None

    diagnostics = EmDiagnostics(len(history), history[-1], restart, converged, tuple(history),
                                tuple(decreases))
    return model, diagnostics


def fit_gmm(points, k: int, em_cfg: EmConfig | None = None, rng: RngSpec | None = None,
            mc_samples: int = MC_SAMPLES) -> GmmModel:
    """Fit a K-component mixture by EM, keeping the best of several restarts.

    Restarts are seeded by k-means++ from rng.child(restart). The best
    restart is chosen by (log-likelihood, lowest restart index), so the
    result does not depend on how restarts are scheduled.
    """
    cfg = em_cfg or EmConfig()
    rng = rng or RngSpec(0)
    points = _as_rows(points)
    n, d = points.shape
    if k < 1:
        raise SizeError(f"K must be at least 1, got {k}")
    if n < k * (d + 1):
        raise SizeError(f"need at least {k * (d + 1)} points for K={k} in {d} dims, got {n}")

    restarts = range(max(1, cfg.restarts))
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            runs = list(pool.map(lambda r: _run_em(points, k, cfg, r, rng), restarts))
    else:
        runs = [_run_em(points, k, cfg, r, rng) for r in restarts]

    successful = [run for run in runs if run is not None]
    if not successful:
        raise DegeneracyError(f"all {len(runs)} EM restarts collapsed",
                              {"k": k, "n": n, "restarts": len(runs)})
    model, diagnostics = max(successful, key=lambda run: (run[1].log_likelihood, -run[1].restart))
    _LOGGER.debug("GMM K=%d selected restart %d after %d iterations, mean log-likelihood %.6f",
                  k, diagnostics.restart, diagnostics.iterations, diagnostics.log_likelihood)
    return GmmModel(model.weights, model.components, diagnostics, rng, mc_samples)


def gmm_density_threshold(model: GmmModel, delta: float, mc_samples: int, rng: RngSpec) -> float:
    """Density level t whose superlevel set has model mass 1 - delta.

    t is the delta-quantile of the model density over mc_samples draws from
    the model itself.
    """
    _check_delta(delta)
    if delta * mc_samples < MC_MIN_TAIL:
        raise ResolutionError(
            f"delta={delta:g} with {mc_samples} samples leaves fewer than {MC_MIN_TAIL} tail draws",
            {"delta": delta, "mc_samples": mc_samples})
    if mc_samples < MC_MIN_SAMPLES:
        _LOGGER.warning("Only %d Monte-Carlo samples for the density threshold", mc_samples)
    draws = model.sample(mc_samples, rng.child(0xD5).generator())
    log_density = model.logpdf(draws)
    threshold = math.exp(float(np.quantile(log_density, delta)))
    _LOGGER.debug("Density threshold at delta=%g: %.6g", delta, threshold)
    return threshold


@dataclass(frozen=True, eq=False)
class ActionGmm:
    """One mixture per timestep of a windowed action."""

    steps: tuple[GmmModel, ...]
    model_class: str = "gmm"

    @property
    def k(self) -> int:
        return self.steps[0].k


def fit_action_gmm(actions: np.ndarray, k: int, em_cfg: EmConfig | None = None,
                   rng: RngSpec | None = None, mc_samples: int = MC_SAMPLES) -> ActionGmm:
    """Fit a mixture per timestep on (N, T, 2) windowed actions."""
    rng = rng or RngSpec(0)
    actions = np.asarray(actions, dtype=float)
    return ActionGmm(tuple(
        fit_gmm(actions[:, t, :], k, em_cfg, rng.child(t), mc_samples)
        for t in range(actions.shape[1])
    ))
