"""Quantile tubes and scenario hulls over windowed actions.

A quantile tube keeps ceil((1 - delta) N) training actions and takes as
its cross-section at every timestep the convex hull of the kept actions.
It is built by greedy shrinking: starting from the hulls of all actions,
the action whose removal most decreases the summed cross-section area is
dropped, ties broken by perimeter decrease and then by lowest record
index. One removal sequence serves every delta, so tubes for a delta grid
are nested by construction.

Only hull vertices are ever removed. Before the greedy loop each
timestep's candidates are reduced to a pool of the points farthest from
the sample mean in Mahalanobis distance; the pool is accepted only when
every halfplane touching the excluded core contains more pool points than
the number of removals, so that no core point can reach the hull.
"""
from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.stats

from .constants import BISECTION_TOL, SCENARIO_BETA
from .exceptions import DegeneracyError, RangeError, SizeError
from .gaussian import cholesky_or_raise
from .geometry import convex_hull, points_in_convex_polygon, polygon_area, polygon_perimeter
from .trajectory import grid_steps

_LOGGER = logging.getLogger(__name__)

# Slack on delta * N before flooring, for products like 0.29 * 100.
_FLOOR_SLACK = 1e-9
_MIN_POOL = 64


def removal_count(delta: float, n: int) -> int:
    """Number of greedy removals, floor(delta * N)."""
    if not 0.0 <= delta < 1.0:
        raise RangeError(f"delta must lie in [0, 1), got {delta}")
    m = int(math.floor(delta * n + _FLOOR_SLACK))
    if m >= n:
        raise RangeError(f"delta={delta} would remove all {n} actions")
    return m


def window_actions(actions: np.ndarray, window: float | None = None,
                   sample_rate: float | None = None) -> np.ndarray:
    """Restrict (N, T, 2) actions to their first `window` seconds."""
    actions = np.asarray(actions, dtype=float)
    if actions.ndim == 2:
        actions = actions[:, None, :]
    if window is None:
        return actions
    if sample_rate is None:
        raise RangeError("a window in seconds needs the sample rate")
    steps = grid_steps(window, sample_rate)
    if not 0 < steps <= actions.shape[1]:
        raise RangeError(f"window {window} s is outside the {actions.shape[1]}-step actions")
    return actions[:, :steps]


@dataclass(frozen=True, eq=False)
class QuantileTube:
    """Per-timestep convex cross-sections covering ceil((1 - delta) N) actions."""

    cross_sections: tuple[np.ndarray, ...]
    target_delta: float
    coverage: int
    n_train: int
    removed: tuple[int, ...] = ()
    model_class: str = "quantile"

    @property
    def n_steps(self) -> int:
        return len(self.cross_sections)

    def area(self) -> float:
        """Summed cross-section area."""
        return sum(polygon_area(poly) for poly in self.cross_sections)


@dataclass(frozen=True, eq=False)
class QuantileTubeSet:
    """Nested tubes for several deltas from one greedy removal sequence."""

    tubes: dict[float, QuantileTube]
    removal_order: tuple[int, ...]
    n_train: int
    model_class: str = "quantile"

    def for_delta(self, delta: float) -> QuantileTube:
        """Tube fitted for exactly this delta."""
        try:
            return self.tubes[delta]
        except KeyError as err:
            raise RangeError(f"no tube was fitted for delta={delta:g}") from err


@dataclass(frozen=True, eq=False)
class ScenarioHull:
    """Per-timestep convex hulls of every training action."""

    cross_sections: tuple[np.ndarray, ...]
    support_count: int
    n_train: int
    model_class: str = "scenario"

    @property
    def n_steps(self) -> int:
        return len(self.cross_sections)

    def violation_bound(self, beta: float = SCENARIO_BETA) -> float:
        """Distribution-free violation probability bound at confidence 1 - beta."""
        return campi_violation_bound(self.n_train, self.support_count, beta)


def _min_halfplane_count(z: np.ndarray, radius: float) -> int:
    """Fewest rows of z in any closed halfplane {u.x >= radius}, |u| = 1."""
    rho = np.hypot(z[:, 0], z[:, 1])
    phi = np.arctan2(z[:, 1], z[:, 0])
    alpha = np.arccos(np.clip(radius / np.maximum(rho, radius), -1.0, 1.0))
    two_pi = 2.0 * math.pi
    angles = np.concatenate([(phi - alpha) % two_pi, (phi + alpha) % two_pi])
    steps = np.concatenate([np.ones(len(z), dtype=int), -np.ones(len(z), dtype=int)])
    # Starts before ends at equal angles: arcs are closed.
    order = np.lexsort((-steps, angles))
    angles, steps = angles[order], steps[order]

    reference = 0.5 * (angles[-1] + angles[0] + two_pi) % two_pi
    base = int(np.sum(np.cos(reference - phi) * rho >= radius))
    running = base + np.cumsum(steps)
    group_end = np.r_[angles[1:] != angles[:-1], True]
    return int(min(base, running[group_end].min()))


def candidate_pool(points: np.ndarray, removals: int) -> np.ndarray:
    """Indices that can become hull vertices within `removals` removals."""
    n = len(points)
    start = 4 * (removals + 1) + _MIN_POOL
    if n <= start:
        return np.arange(n)
    try:
        mean = points.mean(axis=0)
        centered = points - mean
        chol = cholesky_or_raise(centered.T @ centered / n)
    except DegeneracyError:
        return np.arange(n)
    z = scipy.linalg.solve_triangular(chol, centered.T, lower=True).T
    depth = np.hypot(z[:, 0], z[:, 1])
    order = np.argsort(-depth, kind="stable")

    size = start
    while size < n:
        pool = order[:size]
        radius = float(depth[order[size - 1]])
        if radius > 0 and _min_halfplane_count(z[pool], radius) >= removals + 1:
            return np.sort(pool)
        size *= 2
    return np.arange(n)


@dataclass
class _Removal:
    area_gain: float
    perimeter_gain: float
    replacement: list[int]
    whole_hull: bool


@dataclass
class _Step:
    """Greedy state of one timestep."""

    points: np.ndarray
    pool: np.ndarray
    hull: list[int]
    removals: dict[int, _Removal] = field(default_factory=dict)

    def alive_pool(self, alive: np.ndarray) -> np.ndarray:
        return self.pool[alive[self.pool]]

    def evaluate(self, vertex: int, alive: np.ndarray) -> _Removal:
        """Effect on this cross-section of removing one hull vertex."""
        hull = self.hull
        if len(hull) < 3:
            return self._evaluate_whole(vertex, alive)
        j = hull.index(vertex)
        prev, nxt = hull[j - 1], hull[(j + 1) % len(hull)]
        a, v, b = self.points[prev], self.points[vertex], self.points[nxt]

        members = self.alive_pool(alive)
        members = members[(members != vertex) & (members != prev) & (members != nxt)]
        coords = self.points[members]
        lo = np.minimum(np.minimum(a, v), b)
        hi = np.maximum(np.maximum(a, v), b)
        boxed = np.all((coords >= lo) & (coords <= hi), axis=1)
        members, coords = members[boxed], coords[boxed]
        if len(members):
            inside = points_in_convex_polygon(np.stack([a, v, b]), coords)
            members, coords = members[inside], coords[inside]

        chain = _inner_chain(self.points, prev, nxt, members)
        new_path = self.points[[prev, *chain, nxt]]
        area_gain = polygon_area(np.stack([a, v, b])) - polygon_area(new_path)
        old_length = np.linalg.norm(v - a) + np.linalg.norm(b - v)
        new_length = float(np.sum(np.linalg.norm(np.diff(new_path, axis=0), axis=1)))
        return _Removal(area_gain, float(old_length - new_length), chain, False)

    def _evaluate_whole(self, vertex: int, alive: np.ndarray) -> _Removal:
        members = self.alive_pool(alive)
        members = members[members != vertex]
        new_hull = [int(i) for i in members[convex_hull(self.points[members])]] if len(members) else []
        old = self.points[self.hull]
        new = self.points[new_hull] if new_hull else np.zeros((0, 2))
        return _Removal(polygon_area(old) - polygon_area(new),
                        polygon_perimeter(old) - polygon_perimeter(new), new_hull, True)

    def apply(self, vertex: int, removal: _Removal) -> tuple[set[int], set[int]]:
        """Splice a removal into the hull; return (vertices dropped, vertices to re-evaluate)."""
        if removal.whole_hull:
            old = set(self.hull)
            self.hull = list(removal.replacement)
            return old - set(self.hull), set(self.hull)
        j = self.hull.index(vertex)
        prev, nxt = self.hull[j - 1], self.hull[(j + 1) % len(self.hull)]
        self.hull[j:j + 1] = removal.replacement
        return {vertex}, {prev, nxt, *removal.replacement}


def _inner_chain(points: np.ndarray, start: int, end: int, members: np.ndarray) -> list[int]:
    """Convex chain from start to end over members, bulging to the right of start->end."""
    if not len(members):
        return []
    origin = points[start]
    axis = points[end] - origin
    rel = points[members] - origin
    along = rel @ axis
    left = axis[0] * rel[:, 1] - axis[1] * rel[:, 0]
    order = members[np.lexsort((members, left, along))]

    def cross(o: int, p: int, q: int) -> float:
        return ((points[p, 0] - points[o, 0]) * (points[q, 1] - points[o, 1])
                - (points[p, 1] - points[o, 1]) * (points[q, 0] - points[o, 0]))

    chain = [start]
    for index in [*order.tolist(), end]:
        while len(chain) > 1 and cross(chain[-2], chain[-1], index) <= 0:
            chain.pop()
        chain.append(int(index))
    return chain[1:-1]


def _greedy_removals(actions: np.ndarray, removals: int,
                     checkpoints: Sequence[int]) -> tuple[list[int], dict[int, tuple[np.ndarray, ...]]]:
    """Run the greedy shrinking and snapshot the cross-sections at each checkpoint."""
    n, steps = actions.shape[:2]
    alive = np.ones(n, dtype=bool)
    states: list[_Step] = []
    vertex_steps: dict[int, set[int]] = {}
    for t in range(steps):
        points = actions[:, t, :]
        pool = candidate_pool(points, removals)
        hull = [int(i) for i in pool[convex_hull(points[pool])]]
        states.append(_Step(points, pool, hull))
        for v in hull:
            vertex_steps.setdefault(v, set()).add(t)
    _LOGGER.debug("Greedy tube over %d actions, %d steps, pools of %s points",
                  n, steps, sorted({len(s.pool) for s in states}))

    version: dict[int, int] = {}
    heap: list[tuple[float, float, int, int]] = []

    def refresh(action: int) -> None:
        version[action] = version.get(action, 0) + 1
        area = perimeter = 0.0
        for t in sorted(vertex_steps.get(action, ())):
            removal = states[t].removals[action]
            area += removal.area_gain
            perimeter += removal.perimeter_gain
        if vertex_steps.get(action):
            heapq.heappush(heap, (-area, -perimeter, action, version[action]))

    for t, state in enumerate(states):
        for v in state.hull:
            state.removals[v] = state.evaluate(v, alive)
    for action in sorted(vertex_steps):
        refresh(action)

    wanted = set(checkpoints)
    snapshots: dict[int, tuple[np.ndarray, ...]] = {}

    def snapshot() -> tuple[np.ndarray, ...]:
        return tuple(state.points[state.hull].copy() for state in states)

    if 0 in wanted:
        snapshots[0] = snapshot()
    order: list[int] = []
    for done in range(1, removals + 1):
        while True:
            _, _, action, stamp = heapq.heappop(heap)
            if stamp == version[action] and alive[action] and vertex_steps.get(action):
                break
        alive[action] = False
        order.append(action)

        touched: set[int] = set()
        for t in sorted(vertex_steps.pop(action)):
            state = states[t]
            dropped, dirty = state.apply(action, state.removals.pop(action))
            for v in dropped - {action}:
                vertex_steps[v].discard(t)
                state.removals.pop(v, None)
                touched.add(v)
            for v in dirty:
                vertex_steps.setdefault(v, set()).add(t)
                state.removals[v] = state.evaluate(v, alive)
                touched.add(v)
        for v in sorted(touched):
            refresh(v)
        if done in wanted:
            snapshots[done] = snapshot()
    return order, snapshots


def fit_quantile_tubes(actions: np.ndarray, deltas: Sequence[float], window: float | None = None,
                       sample_rate: float | None = None) -> QuantileTubeSet:
    """Fit nested quantile tubes for every delta from one greedy sequence."""
    actions = window_actions(actions, window, sample_rate)
    n = len(actions)
    if n < 3:
        raise SizeError(f"a quantile tube needs at least 3 actions, got {n}")
    counts = {float(delta): removal_count(delta, n) for delta in deltas}
    order, snapshots = _greedy_removals(actions, max(counts.values(), default=0),
                                        sorted(set(counts.values())))
    tubes = {
        delta: QuantileTube(snapshots[m], delta, n - m, n, tuple(order[:m]))
        for delta, m in counts.items()
    }
    _LOGGER.debug("Fitted %d quantile tubes over %d actions with %d removals",
                  len(tubes), n, len(order))
    return QuantileTubeSet(tubes, tuple(order), n)


def fit_quantile_tube(actions: np.ndarray, delta: float, window: float | None = None,
                      sample_rate: float | None = None) -> QuantileTube:
    """Greedy smallest convex tube holding ceil((1 - delta) N) actions."""
    return fit_quantile_tubes(actions, [delta], window, sample_rate).for_delta(float(delta))


def fit_scenario_hull(actions: np.ndarray, window: float | None = None,
                      sample_rate: float | None = None) -> ScenarioHull:
    """Convex hull of every training action at each timestep."""
    actions = window_actions(actions, window, sample_rate)
    n = len(actions)
    if n < 3:
        raise SizeError(f"a scenario hull needs at least 3 actions, got {n}")
    sections = []
    for t in range(actions.shape[1]):
        points = actions[:, t, :]
        sections.append(points[convex_hull(points)].copy())
    support = max(len(poly) for poly in sections)
    _LOGGER.debug("Scenario hull over %d actions has support count %d", n, support)
    return ScenarioHull(tuple(sections), support, n)


def campi_violation_bound(n: int, k: int, beta: float = SCENARIO_BETA) -> float:
    """Smallest eps with P[Binomial(n, eps) <= k - 1] <= beta.

    Bisection on the log binomial tail, which decreases in eps.
    """
    if not n > k >= 1:
        raise RangeError(f"need N > k >= 1, got N={n}, k={k}")
    if not 0.0 < beta < 1.0:
        raise RangeError(f"beta must lie in (0, 1), got {beta}")
    log_beta = math.log(beta)
    lo, hi = 0.0, 1.0
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if scipy.stats.binom.logcdf(k - 1, n, mid) <= log_beta:
            hi = mid
        else:
            lo = mid
    return hi
