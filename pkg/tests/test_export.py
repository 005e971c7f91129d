"""Test cases for Gaussian tube export."""
import numpy as np
import pandas as pd
import pytest

from tailcal.core.exceptions import RangeError, UnsupportedQueryError
from tailcal.core.gaussian import ActionGaussian, GaussianModel
from tailcal.core.membership import ModeConditionedModel
from tailcal.core.tubes import fit_scenario_hull
from tailcal.export import export_tube, level_tails, tube_columns, tube_frame

MODEL = ActionGaussian((
    GaussianModel([0.0, 1.0], np.diag([1.0, 4.0])),
    GaussianModel([2.0, 3.0], np.diag([9.0, 0.25])),
))


def test_tube_columns_and_tails():
    """Test the column layout and the tail mass of each level."""
    assert tube_columns([1, 2.5])[-8:] == [
        "lower_x_1", "upper_x_1", "lower_y_1", "upper_y_1",
        "lower_x_2.5", "upper_x_2.5", "lower_y_2.5", "upper_y_2.5",
    ]
    tails = level_tails([0, 1, 2])
    assert tails["0"] == pytest.approx(1.0)
    assert tails["1"] == pytest.approx(0.31731, abs=1e-5)
    assert tails["2"] == pytest.approx(0.04550, abs=1e-5)


def test_tube_frame_values():
    """Test centre lines, sigmas and bounds per step."""
    frame = tube_frame(MODEL, None, [0, 2], sample_rate=10.0)
    assert frame["step"].tolist() == [1, 2]
    assert frame["time"].tolist() == pytest.approx([0.1, 0.2])
    assert frame["sigma_x"].tolist() == pytest.approx([1.0, 3.0])
    assert frame["sigma_y"].tolist() == pytest.approx([2.0, 0.5])
    assert frame["lower_x_2"].tolist() == pytest.approx([-2.0, -4.0])
    assert frame["upper_y_2"].tolist() == pytest.approx([5.0, 4.0])
    assert frame["lower_x_0"].tolist() == frame["center_x"].tolist()
    assert frame["mode_label"].isna().all()


def test_export_mode_conditioned(tmp_path):
    """Test resolving the mode and writing the CSV."""
    model = ModeConditionedModel({1: MODEL})
    path = export_tube(model, 1, [1], tmp_path / "tube.csv")
    frame = pd.read_csv(path)
    assert list(frame.columns) == tube_columns([1])
    assert frame["mode_label"].tolist() == [1, 1]
    assert frame["upper_x_1"].tolist() == pytest.approx([1.0, 5.0])


def test_export_errors():
    """Test unsupported models, missing modes and invalid levels."""
    with pytest.raises(UnsupportedQueryError):
        tube_frame(fit_scenario_hull(np.random.default_rng(0).normal(size=(20, 2, 2))), None, [1])
    with pytest.raises(UnsupportedQueryError):
        tube_frame(ModeConditionedModel({1: MODEL}), None, [1])
    with pytest.raises(RangeError):
        tube_frame(ModeConditionedModel({1: MODEL}), 2, [1])
    with pytest.raises(RangeError):
        tube_frame(MODEL, None, [])
    with pytest.raises(RangeError):
        tube_frame(MODEL, None, [-1])
