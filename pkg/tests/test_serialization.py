"""Test cases for model documents."""
import json

import numpy as np
import pytest

from tailcal.core.exceptions import SchemaError, UnsupportedQueryError
from tailcal.core.gaussian import fit_action_gaussian, fit_noisy_rational
from tailcal.core.membership import ModeConditionedModel, contains_many
from tailcal.core.mixture import fit_gmm
from tailcal.core.rng import RngSpec
from tailcal.core.serialization import model_from_document, model_to_document
from tailcal.core.tubes import fit_quantile_tubes, fit_scenario_hull

RNG = np.random.default_rng(12)
POINTS = RNG.normal(size=(800, 2))
ACTIONS = RNG.normal(size=(800, 3, 2))
QUERIES = RNG.normal(size=(2000, 3, 2)) * 1.5


def through_json(model, rng=None):
    return model_from_document(json.loads(json.dumps(model_to_document(model, rng))))


def test_document_layout():
    """Test the version, class tag and provenance fields."""
    document = model_to_document(fit_noisy_rational(POINTS), RngSpec(5, 1))
    assert document["version"] == 1
    assert document["class"] == "gaussian"
    assert document["parameters"]["model_class"] == "noisy_rational"
    assert document["rng"] == {"seed": 5, "stream_id": 1, "path": []}


def test_region_models_answer_identically_after_reload():
    """Test membership equality for reloaded region models."""
    for model in (
        fit_action_gaussian(ACTIONS),
        fit_action_gaussian(ACTIONS, region="joint"),
        fit_quantile_tubes(ACTIONS, [0.1, 0.01]),
        fit_scenario_hull(ACTIONS),
    ):
        again = through_json(model)
        assert type(again) is type(model)
        for delta in (0.1, 0.01):
            np.testing.assert_array_equal(contains_many(model, QUERIES, delta),
                                          contains_many(again, QUERIES, delta))


def test_gmm_reload_keeps_threshold_stream():
    """Test that a reloaded mixture rebuilds the same density threshold."""
    mixture = fit_gmm(POINTS, 2, rng=RngSpec(3), mc_samples=20_000)
    again = through_json(mixture)
    assert again.log_threshold(0.05) == mixture.log_threshold(0.05)
    assert again.diagnostics.restart == mixture.diagnostics.restart


def test_mode_conditioned_reload():
    """Test nested documents keyed by mode label."""
    model = ModeConditionedModel({0: fit_action_gaussian(ACTIONS[:400]), 2: fit_action_gaussian(ACTIONS[400:])})
    again = through_json(model)
    labels = np.where(np.arange(len(QUERIES)) % 2 == 0, 0, 2)
    assert sorted(again.models) == [0, 2]
    assert again.model_class == model.model_class
    np.testing.assert_array_equal(contains_many(model, QUERIES, 0.01, labels),
                                  contains_many(again, QUERIES, 0.01, labels))


def test_document_errors():
    """Test unknown classes and unsupported objects."""
    with pytest.raises(SchemaError):
        model_from_document({"class": "kde", "parameters": {}})
    with pytest.raises(SchemaError):
        model_from_document({"parameters": {}})
    with pytest.raises(UnsupportedQueryError):
        model_to_document(object())
