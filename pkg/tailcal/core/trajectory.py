"""Trajectory and scenario types, state/action splitting and scenario pruning."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Literal

import numpy as np

from .constants import EPSILON_ENV, EPSILON_TRAJ, GRID_TOLERANCE, SHARD_SIZE, STATE_SECONDS
from .exceptions import GridError, RangeError, SchemaError

_LOGGER = logging.getLogger(__name__)

Role = Literal["train", "test"]


def _frozen_array(values, dtype=float) -> np.ndarray:
    """Copy values into a read-only array."""
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def grid_steps(seconds: float, sample_rate: float) -> int:
    """Convert a duration to a whole number of sample steps.

    Raises GridError when the duration does not land on the sample grid.
    """
    steps = seconds * sample_rate
    nearest = round(steps)
    if not math.isclose(steps, nearest, rel_tol=0.0, abs_tol=GRID_TOLERANCE * max(1.0, abs(steps))):
        raise GridError(
            f"{seconds} s is off the {sample_rate} Hz sample grid (step {1.0 / sample_rate} s)"
        )
    return int(nearest)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-stamped 2D positions sampled on a uniform grid."""

    positions: np.ndarray
    sample_rate: float
    duration: float
    start_time: float = 0.0

    def __post_init__(self) -> None:
        """Validate and freeze the positions."""
        positions = _frozen_array(self.positions)
        object.__setattr__(self, "positions", positions)
        if self.sample_rate <= 0:
            raise RangeError(f"sample_rate must be positive, got {self.sample_rate}")
        if positions.ndim != 2 or positions.shape[1] != 2:
            raise SchemaError(f"positions must have shape (n, 2), got {positions.shape}")
        expected = grid_steps(self.duration, self.sample_rate) + 1
        if positions.shape[0] != expected:
            raise SchemaError(
                f"{self.duration} s at {self.sample_rate} Hz needs {expected} samples, "
                f"got {positions.shape[0]}"
            )
        if not np.all(np.isfinite(positions)):
            raise SchemaError("trajectory coordinates must be finite")

    def __len__(self) -> int:
        return self.positions.shape[0]

    @property
    def times(self) -> np.ndarray:
        """Sample times in seconds."""
        return self.start_time + np.arange(len(self)) / self.sample_rate


@dataclass(frozen=True, eq=False)
class EnvironmentContext:
    """Fixed-length context vector; absent neighbors hold the sentinel."""

    features: np.ndarray
    sentinel: float | None = None

    def __post_init__(self) -> None:
        """Validate and freeze the features."""
        features = _frozen_array(self.features).reshape(-1)
        object.__setattr__(self, "features", features)
        if not np.all(np.isfinite(features) | absent_mask(features, self.sentinel)):
            raise SchemaError("context entries must be finite or the sentinel")

    @property
    def dim(self) -> int:
        return self.features.shape[0]


def absent_mask(features: np.ndarray, sentinel: float | None) -> np.ndarray:
    """Mask of entries equal to the sentinel."""
    if sentinel is None:
        return np.zeros(np.shape(features), dtype=bool)
    if isinstance(sentinel, float) and math.isnan(sentinel):
        return np.isnan(features)
    return np.asarray(features) == sentinel


@dataclass(frozen=True, eq=False)
class Scenario:
    """A trajectory with its context and optional oracle target lane."""

    trajectory: Trajectory
    context: EnvironmentContext
    mode_label: int | None = None
    source: str = ""
    record_index: int = 0
    swerve: bool | None = None

    @property
    def identity(self) -> tuple[str, int]:
        """Stable identity used for deduplication."""
        return (self.source, self.record_index)


@dataclass(frozen=True, eq=False)
class StateAction:
    """A scenario split into its observed prefix and the future action."""

    state: Trajectory
    context: EnvironmentContext
    action: Trajectory

    def rejoin(self) -> np.ndarray:
        """Concatenate prefix and action, sharing the boundary sample."""
        return np.concatenate([self.state.positions[:-1], self.action.positions])


@dataclass(frozen=True)
class PruningConfig:
    """Closeness thresholds for equivalent scenarios."""

    epsilon_traj: float = EPSILON_TRAJ
    epsilon_env: float = EPSILON_ENV
    prefix_seconds: float = STATE_SECONDS

    def __post_init__(self) -> None:
        """Validate thresholds."""
        if self.epsilon_traj <= 0 or self.epsilon_env <= 0:
            raise RangeError("pruning thresholds must be positive")
        if self.prefix_seconds <= 0:
            raise RangeError("prefix_seconds must be positive")


@dataclass(frozen=True, eq=False)
class Dataset:
    """A collection of scenarios sharing sample rate and context dimension."""

    scenarios: tuple[Scenario, ...]
    role: Role = "train"
    sentinel: float | None = field(default=None)

    def __post_init__(self) -> None:
        """Validate uniformity across members."""
        scenarios = tuple(self.scenarios)
        object.__setattr__(self, "scenarios", scenarios)
        if self.role not in ("train", "test"):
            raise RangeError(f"role must be 'train' or 'test', got {self.role!r}")
        if not scenarios:
            return
        first = scenarios[0]
        if self.sentinel is None and first.context.sentinel is not None:
            object.__setattr__(self, "sentinel", first.context.sentinel)
        for scenario in scenarios[1:]:
            if scenario.trajectory.sample_rate != first.trajectory.sample_rate:
                raise SchemaError("scenarios in a dataset must share one sample rate")
            if scenario.context.dim != first.context.dim:
                raise SchemaError("scenarios in a dataset must share one context dimension")

    def __len__(self) -> int:
        return len(self.scenarios)

    def __iter__(self) -> Iterator[Scenario]:
        return iter(self.scenarios)

    def __getitem__(self, index: int) -> Scenario:
        return self.scenarios[index]

    @property
    def sample_rate(self) -> float | None:
        return self.scenarios[0].trajectory.sample_rate if self.scenarios else None

    @property
    def context_dim(self) -> int | None:
        return self.scenarios[0].context.dim if self.scenarios else None

    def subset(self, indices: Iterable[int], role: Role | None = None) -> Dataset:
        """Return the members at the given indices, in the given order."""
        return Dataset(tuple(self.scenarios[i] for i in indices), role or self.role, self.sentinel)

    def with_mode(self, mode_label: int | None) -> Dataset:
        """Return the members carrying the given oracle mode label."""
        return self.subset(i for i, s in enumerate(self.scenarios) if s.mode_label == mode_label)

    @cached_property
    def contexts(self) -> np.ndarray:
        """Context vectors stacked as (N, d)."""
        return np.stack([s.context.features for s in self.scenarios])

    @cached_property
    def absent(self) -> np.ndarray:
        """Sentinel mask over the stacked contexts."""
        return np.stack([absent_mask(s.context.features, s.context.sentinel) for s in self.scenarios])

    def prefixes(self, seconds: float) -> np.ndarray:
        """First `seconds` of every trajectory stacked as (N, k + 1, 2)."""
        steps = grid_steps(seconds, self.sample_rate)
        return np.stack([s.trajectory.positions[: steps + 1] for s in self.scenarios])

    def action_windows(self, split_time: float, horizon: float | None = None,
                       relative: bool = True) -> np.ndarray:
        """Future samples after `split_time`, stacked as (N, k, 2).

        The shared boundary sample belongs to the state and is excluded.
        With `relative`, positions are offsets from the boundary sample.
        """
        rate = self.sample_rate
        split = grid_steps(split_time, rate)
        stop = None if horizon is None else split + grid_steps(horizon, rate) + 1
        windows = np.stack([s.trajectory.positions[split:stop] for s in self.scenarios])
        if relative:
            windows = windows - windows[:, :1, :]
        return windows[:, 1:, :]


def split_state_action(scenario: Scenario, split_time: float) -> StateAction:
    """Divide a scenario into the state prefix [0, split] and the action [split, end]."""
    trajectory = scenario.trajectory
    if not 0 < split_time < trajectory.duration:
        raise RangeError(f"split_time {split_time} must lie inside (0, {trajectory.duration})")
    steps = grid_steps(split_time, trajectory.sample_rate)
    state = Trajectory(trajectory.positions[: steps + 1], trajectory.sample_rate,
                       steps / trajectory.sample_rate, trajectory.start_time)
    action = Trajectory(trajectory.positions[steps:], trajectory.sample_rate,
                        trajectory.duration - steps / trajectory.sample_rate,
                        trajectory.start_time + steps / trajectory.sample_rate)
    return StateAction(state, scenario.context, action)


def replan_window(action: Trajectory, horizon: float) -> Trajectory:
    """Truncate an action to its first `horizon` seconds."""
    if horizon <= 0 or horizon > action.duration + GRID_TOLERANCE:
        raise RangeError(f"horizon {horizon} must lie inside (0, {action.duration}]")
    steps = grid_steps(horizon, action.sample_rate)
    return Trajectory(action.positions[: steps + 1], action.sample_rate,
                      steps / action.sample_rate, action.start_time)


def _check_compatible(test: Scenario, train: Dataset) -> None:
    if not len(train):
        return
    if test.trajectory.sample_rate != train.sample_rate:
        raise SchemaError(
            f"sample rate mismatch: test {test.trajectory.sample_rate} Hz, train {train.sample_rate} Hz"
        )
    if test.context.dim != train.context_dim:
        raise SchemaError(
            f"context dimension mismatch: test {test.context.dim}, train {train.context_dim}"
        )


def _equivalence_mask(test: Scenario, prefixes: np.ndarray, contexts: np.ndarray,
                      absent: np.ndarray, cfg: PruningConfig) -> np.ndarray:
    """Closeness of one test scenario against a block of train rows."""
    steps = prefixes.shape[1] - 1
    test_prefix = test.trajectory.positions[: steps + 1]
    traj_dist = np.max(np.abs(prefixes - test_prefix), axis=(1, 2))

    test_absent = absent_mask(test.context.features, test.context.sentinel)
    env_diff = np.abs(contexts - test.context.features)
    env_diff = np.where(absent | test_absent, 0.0, env_diff)
    env_diff = np.where(absent ^ test_absent, np.inf, env_diff)
    env_dist = np.max(env_diff, axis=1) if env_diff.shape[1] else np.zeros(len(prefixes))

    return (traj_dist < cfg.epsilon_traj) & (env_dist < cfg.epsilon_env)


def _shards(total: int, size: int) -> list[slice]:
    return [slice(start, min(start + size, total)) for start in range(0, total, size)]


def _scan(test: Scenario, train: Dataset, cfg: PruningConfig, prefixes: np.ndarray,
          workers: int) -> np.ndarray:
    """Evaluate the equivalence mask over train shards, merged in shard order."""
    shards = _shards(len(train), SHARD_SIZE)
    contexts, absent = train.contexts, train.absent

    def run(block: slice) -> np.ndarray:
        return _equivalence_mask(test, prefixes[block], contexts[block], absent[block], cfg)

    if workers > 1 and len(shards) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, shards))
    else:
        parts = [run(block) for block in shards]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=bool)


def equivalent_scenarios(test: Scenario, train: Dataset, cfg: PruningConfig | None = None,
                         workers: int = 1) -> Dataset:
    """Return the train scenarios whose prefix and context lie within the pruning thresholds of `test`."""
    cfg = cfg or PruningConfig()
    _check_compatible(test, train)
    if not len(train):
        return Dataset((), train.role, train.sentinel)
    prefixes = train.prefixes(cfg.prefix_seconds)
    mask = _scan(test, train, cfg, prefixes, workers)
    _LOGGER.debug("Scenario %s matched %d of %d train scenarios",
                  test.identity, int(mask.sum()), len(train))
    return train.subset(np.flatnonzero(mask))


def prune_training_set(test: Dataset, train: Dataset, cfg: PruningConfig | None = None,
                       workers: int = 1) -> Dataset:
    """Union of equivalent scenarios over every test scenario, deduplicated."""
    cfg = cfg or PruningConfig()
    if not len(train) or not len(test):
        return Dataset((), train.role, train.sentinel)
    for scenario in test:
        _check_compatible(scenario, train)

    prefixes = train.prefixes(cfg.prefix_seconds)
    keep = np.zeros(len(train), dtype=bool)
    for scenario in test:
        keep |= _scan(scenario, train, cfg, prefixes, workers)

    seen: set[tuple[str, int]] = set()
    indices: list[int] = []
    for index in np.flatnonzero(keep):
        identity = train[index].identity
        if identity in seen:
            continue
        seen.add(identity)
        indices.append(int(index))

    if not indices:
        _LOGGER.warning("Pruned training set is empty for %d test scenarios", len(test))
    else:
        _LOGGER.debug("Pruned training set keeps %d of %d scenarios", len(indices), len(train))
    return train.subset(indices)
