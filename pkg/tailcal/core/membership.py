"""Delta-region membership queries for every fitted model class."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Mapping, Union

import numpy as np

from .exceptions import RangeError, SchemaError, UnsupportedQueryError
from .gaussian import ActionGaussian, GaussianModel, _check_delta, gaussian_region_radius
from .mixture import ActionGmm, GmmModel
from .modes import TwoModeClassifier
from .geometry import points_in_convex_polygon
from .tubes import QuantileTube, QuantileTubeSet, ScenarioHull

_LOGGER = logging.getLogger(__name__)

# Closed regions: boundary points count as inside up to rounding.
_BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class ModeConditionedModel:
    """One model per oracle mode label; each query is judged by its own mode's model."""

    models: Mapping[int, Any]
    model_class: str = ""

    def __post_init__(self) -> None:
        """Require at least one mode."""
        if not self.models:
            raise RangeError("a mode-conditioned model needs at least one mode")
        if not self.model_class:
            first = next(iter(self.models.values()))
            object.__setattr__(self, "model_class", f"{_model_class(first)}_by_mode")


FittedModel = Union[GaussianModel, ActionGaussian, GmmModel, ActionGmm, QuantileTube,
                    QuantileTubeSet, ScenarioHull, TwoModeClassifier, ModeConditionedModel]


def _model_class(model) -> str:
    return getattr(model, "model_class", type(model).__name__)


def _inside_radius(m2: np.ndarray, radius: float) -> np.ndarray:
    return m2 <= radius * radius * (1.0 + _BOUNDARY_RTOL)


def _action_steps(queries: np.ndarray, steps: int) -> np.ndarray:
    if queries.ndim != 3 or queries.shape[2] != 2:
        raise SchemaError(f"windowed actions must have shape (M, T, 2), got {queries.shape}")
    if queries.shape[1] < steps:
        raise SchemaError(f"model covers {steps} steps, actions only {queries.shape[1]}")
    return queries[:, :steps]


def _in_sections(sections: tuple[np.ndarray, ...], queries: np.ndarray) -> np.ndarray:
    queries = _action_steps(queries, len(sections))
    inside = np.ones(len(queries), dtype=bool)
    for t, polygon in enumerate(sections):
        rows = np.flatnonzero(inside)
        if not len(rows):
            break
        inside[rows] = points_in_convex_polygon(polygon, queries[rows, t])
    return inside


def _gmm_inside(model: GmmModel, points: np.ndarray, delta: float) -> np.ndarray:
    log_t = model.log_threshold(delta)
    return model.logpdf(points) >= log_t - _BOUNDARY_RTOL * max(1.0, abs(log_t))


def contains_many(model: FittedModel, queries, delta: float,
                  labels: np.ndarray | None = None) -> np.ndarray:
    """Membership flag per query in the model's closed 1 - delta region.

    Point models take (M, d) queries; action models take (M, T, 2)
    windowed actions, longer windows being cut to the model's steps.
    Tube and hull regions do not depend on delta.
    """
    queries = np.asarray(queries, dtype=float)

    if isinstance(model, TwoModeClassifier):
        raise UnsupportedQueryError("two-mode classifiers answer mode_posterior, not membership")
    if isinstance(model, ModeConditionedModel):
        return _conditioned(model, queries, delta, labels)
    if isinstance(model, (QuantileTube, ScenarioHull)):
        return _in_sections(model.cross_sections, queries)
    if isinstance(model, QuantileTubeSet):
        return _in_sections(model.for_delta(delta).cross_sections, queries)

    _check_delta(delta)
    if isinstance(model, GaussianModel):
        queries = queries.reshape(-1, model.dim)
        return _inside_radius(model.mahalanobis2(queries), gaussian_region_radius(model, delta))
    if isinstance(model, ActionGaussian):
        queries = _action_steps(queries, model.n_steps)
        if model.region == "joint":
            joint = model.steps[0]
            flat = queries.reshape(len(queries), -1)
            return _inside_radius(joint.mahalanobis2(flat), gaussian_region_radius(joint, delta))
        radius = gaussian_region_radius(2, delta)
        inside = np.ones(len(queries), dtype=bool)
        for t, step in enumerate(model.steps):
            inside &= _inside_radius(step.mahalanobis2(queries[:, t]), radius)
        return inside
    if isinstance(model, GmmModel):
        return _gmm_inside(model, queries.reshape(-1, model.dim), delta)
    if isinstance(model, ActionGmm):
        queries = _action_steps(queries, len(model.steps))
        inside = np.ones(len(queries), dtype=bool)
        for t, step in enumerate(model.steps):
            inside &= _gmm_inside(step, queries[:, t], delta)
        return inside
    raise UnsupportedQueryError(f"no membership test for {type(model).__name__}")


def _conditioned(model: ModeConditionedModel, queries: np.ndarray, delta: float,
                 labels: np.ndarray | None) -> np.ndarray:
    if labels is None:
        raise UnsupportedQueryError("a mode-conditioned model needs the mode label of each query")
    labels = np.asarray(labels)
    if len(labels) != len(queries):
        raise SchemaError(f"{len(labels)} labels for {len(queries)} queries")
    # Queries whose mode never appeared in training have no region.
    inside = np.zeros(len(queries), dtype=bool)
    unknown = ~np.isin(labels, list(model.models))
    if unknown.any():
        _LOGGER.warning("%d queries carry a mode label without a fitted model", int(unknown.sum()))
    for label in sorted(model.models):
        rows = np.flatnonzero(labels == label)
        if len(rows):
            inside[rows] = contains_many(model.models[label], queries[rows], delta)
    return inside


def contains(model: FittedModel, query, delta: float, label: int | None = None) -> bool:
    """Whether one point or one windowed action lies in the 1 - delta region."""
    query = np.asarray(query, dtype=float)
    labels = None if label is None else np.array([label])
    return bool(contains_many(model, query[None], delta, labels)[0])
