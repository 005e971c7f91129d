"""Seeded synthetic data generators.

All generators are pure functions of their parameters and an RngSpec.
Independent quantities are drawn from separate child streams so that
turning one mechanism off never shifts the draws of another.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Literal

import numpy as np

from .constants import (
    CONTEXT_SENTINEL,
    LANE_CHANGE_SECONDS,
    LANE_INITIAL,
    LANE_JITTER_SIGMA,
    LANE_LEAD_PROBABILITY,
    LANE_SPEED_MEAN,
    LANE_SPEED_SIGMA,
    LANE_SWERVE_WINDOW,
    LANE_WIDTH,
    NOISE_FRACTION,
    NONUNIFORM_BETA,
    SCENARIO_DURATION,
)
from .exceptions import MatrixError, RangeError
from .rng import RngSpec
from .trajectory import Dataset, EnvironmentContext, Scenario, Trajectory, grid_steps

_LOGGER = logging.getLogger(__name__)


class NoiseKind(str, Enum):
    """Additive noise families for the Gaussian generator."""

    NONE = "none"
    UNIFORM = "uniform"
    SYMMETRIC_NONUNIFORM = "symmetric_nonuniform"


@dataclass(frozen=True)
class NoiseSpec:
    """Noise family and magnitude as a fraction of the per-axis data range."""

    kind: NoiseKind = NoiseKind.NONE
    noise_frac: float = NOISE_FRACTION

    def __post_init__(self) -> None:
        """Validate the noise magnitude."""
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if not 0.0 <= self.noise_frac <= 1.0:
            raise RangeError(f"noise_frac must lie in [0, 1], got {self.noise_frac}")


@dataclass(frozen=True)
class ModeSpec:
    """Distribution and size of one mode in the two-mode generator."""

    distribution: Literal["gaussian", "uniform"]
    a: float
    b: float
    count: int

    def __post_init__(self) -> None:
        """Validate the parameters."""
        if self.count < 1:
            raise RangeError(f"mode count must be at least 1, got {self.count}")
        if self.distribution == "gaussian":
            if self.b <= 0:
                raise RangeError(f"gaussian sigma must be positive, got {self.b}")
        elif self.distribution == "uniform":
            if not self.a < self.b:
                raise RangeError(f"uniform bounds need lo < hi, got ({self.a}, {self.b})")
        else:
            raise RangeError(f"unknown mode distribution {self.distribution!r}")

    @classmethod
    def gaussian(cls, mean: float, sigma: float, count: int) -> ModeSpec:
        return cls("gaussian", mean, sigma, count)

    @classmethod
    def uniform(cls, lo: float, hi: float, count: int) -> ModeSpec:
        return cls("uniform", lo, hi, count)

    def sample(self, gen: np.random.Generator) -> np.ndarray:
        """Draw `count` points from this mode."""
        if self.distribution == "gaussian":
            return gen.normal(self.a, self.b, size=self.count)
        return gen.uniform(self.a, self.b, size=self.count)

    def __str__(self) -> str:
        return f"{self.distribution}({self.a:g}, {self.b:g}) x {self.count}"


@dataclass(frozen=True)
class LaneConfig:
    """Constants of the synthetic lane-keeping generator."""

    duration: float = SCENARIO_DURATION
    lane_width: float = LANE_WIDTH
    change_seconds: float = LANE_CHANGE_SECONDS
    jitter_sigma: float = LANE_JITTER_SIGMA
    speed_mean: float = LANE_SPEED_MEAN
    speed_sigma: float = LANE_SPEED_SIGMA
    initial_lane: int = LANE_INITIAL
    swerve_window: tuple[float, float] = LANE_SWERVE_WINDOW
    lead_probability: float = LANE_LEAD_PROBABILITY
    sentinel: float = CONTEXT_SENTINEL


def _cholesky(cov: np.ndarray) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise MatrixError(f"covariance must be square, got shape {cov.shape}")
    if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.max(np.abs(cov))))):
        raise MatrixError("covariance must be symmetric")
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as err:
        raise MatrixError("covariance is not positive definite",
                          {"eigenvalues": np.linalg.eigvalsh(cov).tolist()}) from err


def gen_gaussian_2d(n: int, mean, cov, rng: RngSpec) -> np.ndarray:
    """Draw n i.i.d. points from N(mean, cov)."""
    if n < 1:
        raise RangeError(f"n must be at least 1, got {n}")
    mean = np.asarray(mean, dtype=float).reshape(-1)
    chol = _cholesky(cov)
    if chol.shape[0] != mean.shape[0]:
        raise MatrixError(f"mean has dimension {mean.shape[0]}, covariance {chol.shape[0]}")
    z = rng.generator().standard_normal((n, mean.shape[0]))
    return mean + z @ chol.T


def noise_width(points: np.ndarray, noise_frac: float) -> np.ndarray:
    """Per-axis noise half-width as a fraction of the sample's range."""
    return noise_frac * np.ptp(points, axis=0)


def gen_noisy_gaussian_2d(n: int, cov, noise: NoiseSpec, rng: RngSpec, mean=(0.0, 0.0),
                          width: np.ndarray | None = None) -> np.ndarray:
    """Gaussian draw plus additive noise.

    The noise-free part is exactly gen_gaussian_2d(n, mean, cov, rng). The
    half-width defaults to noise_frac times the per-axis range of that
    noise-free sample; pass `width` to reuse the width of another sample so
    that a test set follows the training distribution exactly.
    """
    base = gen_gaussian_2d(n, mean, cov, rng)
    if noise.kind is NoiseKind.NONE:
        return base
    if width is None:
        width = noise_width(base, noise.noise_frac)
    width = np.asarray(width, dtype=float)

    gen = rng.child(1).generator()
    if noise.kind is NoiseKind.UNIFORM:
        shift = gen.uniform(-1.0, 1.0, size=base.shape) * width
    else:
        sign = gen.integers(0, 2, size=base.shape) * 2 - 1
        shift = width * sign * gen.beta(*NONUNIFORM_BETA, size=base.shape)
    return base + shift


def gen_two_mode_1d(mode1: ModeSpec, mode2: ModeSpec, rng: RngSpec) -> tuple[np.ndarray, np.ndarray]:
    """Independent labelled draws for two modes."""
    points1 = mode1.sample(rng.child(1).generator())
    points2 = mode2.sample(rng.child(2).generator())
    _LOGGER.debug("Generated modes %s and %s", mode1, mode2)
    return points1, points2


def lane_swerve_flags(n: int, p_swerve: float, rng: RngSpec) -> np.ndarray:
    """Swerve indicators used by gen_lane_trajectories for the same RngSpec."""
    if not 0.0 <= p_swerve <= 1.0:
        raise RangeError(f"p_swerve must lie in [0, 1], got {p_swerve}")
    return rng.child(2).generator().random(n) < p_swerve


def gen_lane_trajectories(n: int, p_swerve: float, sample_rate: float, rng: RngSpec,
                          cfg: LaneConfig | None = None, source: str = "synthetic-lanes") -> Dataset:
    """Lane-keeping scenarios with rare smooth lane changes.

    Each vehicle holds a constant longitudinal speed with Gaussian lateral
    jitter around its lane centre. With probability p_swerve a cosine ramp
    of one lane width starts at a uniform time in the swerve window. The
    mode label is the final lane; the swerve flag is kept as ground truth.
    """
    cfg = cfg or LaneConfig()
    swerve = lane_swerve_flags(n, p_swerve, rng)
    steps = grid_steps(cfg.duration, sample_rate)
    times = np.arange(steps + 1) / sample_rate

    speed = rng.child(0).generator().normal(cfg.speed_mean, cfg.speed_sigma, size=n)
    jitter = rng.child(1).generator().normal(0.0, cfg.jitter_sigma, size=(n, steps + 1))
    start = rng.child(3).generator().uniform(*cfg.swerve_window, size=n)
    direction = rng.child(4).generator().integers(0, 2, size=n) * 2 - 1
    context_gen = rng.child(5).generator()
    lead = context_gen.random(n) < cfg.lead_probability
    lead_gap = context_gen.uniform(10.0, 80.0, size=n)
    lead_speed = speed + context_gen.normal(0.0, 2.0, size=n)

    progress = np.clip((times[None, :] - start[:, None]) / cfg.change_seconds, 0.0, 1.0)
    ramp = 0.5 * cfg.lane_width * (1.0 - np.cos(np.pi * progress))
    lateral = (cfg.initial_lane * cfg.lane_width + jitter
               + (swerve * direction)[:, None] * ramp)
    longitudinal = speed[:, None] * times[None, :]
    final_lane = cfg.initial_lane + swerve * direction

    scenarios = []
    for i in range(n):
        features = (speed[i], lead_gap[i], lead_speed[i]) if lead[i] else (
            speed[i], cfg.sentinel, cfg.sentinel)
        scenarios.append(Scenario(
            Trajectory(np.column_stack([longitudinal[i], lateral[i]]), sample_rate, cfg.duration),
            EnvironmentContext(np.array(features), cfg.sentinel),
            mode_label=int(final_lane[i]),
            source=source,
            record_index=i,
            swerve=bool(swerve[i]),
        ))
    _LOGGER.debug("Generated %d lane scenarios with %d swerves", n, int(swerve.sum()))
    return Dataset(tuple(scenarios), "train", cfg.sentinel)


def generate_in_chunks(n: int, chunk_size: int, make: Callable[[int, RngSpec], np.ndarray],
                       rng: RngSpec, workers: int = 1) -> np.ndarray:
    """Build n rows chunk by chunk, chunk c drawn from rng.child(c).

    The chunk layout depends only on n and chunk_size, so the result is the
    same for any worker count.
    """
    sizes = [min(chunk_size, n - start) for start in range(0, n, chunk_size)]
    jobs = [(size, rng.child(index)) for index, size in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: make(*job), jobs))
    else:
        parts = [make(*job) for job in jobs]
    return np.concatenate(parts)
