"""Self-describing JSON documents for fitted models."""
from __future__ import annotations

import logging
from typing import Any

import numpy as np

from .exceptions import SchemaError, UnsupportedQueryError
from .gaussian import ActionGaussian, GaussianModel
from .membership import FittedModel, ModeConditionedModel
from .mixture import ActionGmm, EmDiagnostics, GmmModel
from .modes import TwoModeClassifier
from .rng import RngSpec
from .tubes import QuantileTube, QuantileTubeSet, ScenarioHull

_LOGGER = logging.getLogger(__name__)

DOCUMENT_VERSION = 1


def _gaussian(model: GaussianModel) -> dict[str, Any]:
    return {"mean": model.mean.tolist(), "cov": model.cov.tolist(), "n_samples": model.n_samples,
            "model_class": model.model_class, "metadata": dict(model.metadata)}


def _gaussian_from(data: dict[str, Any]) -> GaussianModel:
    return GaussianModel(np.array(data["mean"]), np.array(data["cov"]), int(data.get("n_samples", 0)),
                         data.get("model_class", "gaussian"), dict(data.get("metadata", {})))


def _gmm(model: GmmModel) -> dict[str, Any]:
    return {
        "weights": model.weights.tolist(),
        "components": [_gaussian(c) for c in model.components],
        "mc_samples": model.mc_samples,
        "diagnostics": model.diagnostics.to_dict() if model.diagnostics else None,
        "rng": model.rng.to_dict() if model.rng else None,
    }


def _gmm_from(data: dict[str, Any]) -> GmmModel:
    diagnostics = data.get("diagnostics")
    return GmmModel(
        np.array(data["weights"]),
        tuple(_gaussian_from(c) for c in data["components"]),
        EmDiagnostics(**{**diagnostics, "decreases": tuple(diagnostics.get("decreases", ()))})
        if diagnostics else None,
        RngSpec.from_dict(data["rng"]) if data.get("rng") else None,
        int(data["mc_samples"]),
    )


def _sections(sections) -> list[list[list[float]]]:
    return [np.asarray(poly).tolist() for poly in sections]


def _sections_from(data) -> tuple[np.ndarray, ...]:
    return tuple(np.array(poly, dtype=float).reshape(-1, 2) for poly in data)


def _tube(model: QuantileTube) -> dict[str, Any]:
    return {"cross_sections": _sections(model.cross_sections), "target_delta": model.target_delta,
            "coverage": model.coverage, "n_train": model.n_train, "removed": list(model.removed)}


def _tube_from(data: dict[str, Any]) -> QuantileTube:
    return QuantileTube(_sections_from(data["cross_sections"]), float(data["target_delta"]),
                        int(data["coverage"]), int(data["n_train"]), tuple(data.get("removed", ())))


def model_to_document(model: FittedModel, rng: RngSpec | None = None) -> dict[str, Any]:
    """Class tag, parameters, diagnostics and provenance of a fitted model."""
    diagnostics: dict[str, Any] = {}
    if isinstance(model, GaussianModel):
        tag, parameters = "gaussian", _gaussian(model)
    elif isinstance(model, ActionGaussian):
        tag = "action_gaussian"
        parameters = {"region": model.region, "model_class": model.model_class,
                      "steps": [_gaussian(s) for s in model.steps]}
    elif isinstance(model, GmmModel):
        tag, parameters = "gmm", _gmm(model)
        diagnostics = parameters["diagnostics"] or {}
    elif isinstance(model, ActionGmm):
        tag, parameters = "action_gmm", {"steps": [_gmm(s) for s in model.steps]}
        diagnostics = {"log_likelihood": [s.diagnostics.log_likelihood for s in model.steps
                                          if s.diagnostics]}
    elif isinstance(model, QuantileTube):
        tag, parameters = "quantile_tube", _tube(model)
        diagnostics = {"coverage": model.coverage}
    elif isinstance(model, QuantileTubeSet):
        tag = "quantile_tube_set"
        parameters = {"n_train": model.n_train, "removal_order": list(model.removal_order),
                      "tubes": [_tube(model.tubes[d]) for d in sorted(model.tubes, reverse=True)]}
    elif isinstance(model, ScenarioHull):
        tag = "scenario_hull"
        parameters = {"cross_sections": _sections(model.cross_sections),
                      "support_count": model.support_count, "n_train": model.n_train}
        diagnostics = {"support_count": model.support_count}
    elif isinstance(model, TwoModeClassifier):
        tag = "two_mode"
        parameters = {"mode1": _gaussian(model.mode1), "mode2": _gaussian(model.mode2), "prior": "uniform"}
    elif isinstance(model, ModeConditionedModel):
        tag = "mode_conditioned"
        parameters = {"model_class": model.model_class,
                      "models": {str(k): model_to_document(m) for k, m in sorted(model.models.items())}}
    else:
        raise UnsupportedQueryError(f"cannot serialise {type(model).__name__}")
    return {
        "version": DOCUMENT_VERSION,
        "class": tag,
        "parameters": parameters,
        "diagnostics": diagnostics,
        "rng": rng.to_dict() if rng else None,
    }


def model_from_document(document: dict[str, Any]) -> FittedModel:
    """Rebuild a model written by model_to_document."""
    try:
        tag, data = document["class"], document["parameters"]
    except KeyError as err:
        raise SchemaError(f"model document lacks {err}") from err
    if tag == "gaussian":
        return _gaussian_from(data)
    if tag == "action_gaussian":
        return ActionGaussian(tuple(_gaussian_from(s) for s in data["steps"]), data["region"],
                              data["model_class"])
    if tag == "gmm":
        return _gmm_from(data)
    if tag == "action_gmm":
        return ActionGmm(tuple(_gmm_from(s) for s in data["steps"]))
    if tag == "quantile_tube":
        return _tube_from(data)
    if tag == "quantile_tube_set":
        tubes = {t.target_delta: t for t in (_tube_from(d) for d in data["tubes"])}
        return QuantileTubeSet(tubes, tuple(data["removal_order"]), int(data["n_train"]))
    if tag == "scenario_hull":
        return ScenarioHull(_sections_from(data["cross_sections"]), int(data["support_count"]),
                            int(data["n_train"]))
    if tag == "two_mode":
        return TwoModeClassifier(_gaussian_from(data["mode1"]), _gaussian_from(data["mode2"]))
    if tag == "mode_conditioned":
        return ModeConditionedModel({int(k): model_from_document(v) for k, v in data["models"].items()},
                                    data["model_class"])
    _LOGGER.error("Unknown model document class %s", tag)
    raise SchemaError(f"unknown model class {tag!r}")
