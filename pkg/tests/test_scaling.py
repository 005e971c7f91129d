"""Test cases for the delta_min scaling fit and the VC comparator."""
import math

import pytest

from tailcal.core.exceptions import DegeneracyError, RangeError
from tailcal.core.scaling import (
    KM_PER_TRAJECTORY,
    VcBoundQuery,
    read_scaling_csv,
    scaling_fit,
    vc_lower_bound,
)

INVERSE_N = [(1e3, 1e-3), (1e4, 1e-4), (1e5, 1e-5), (1e6, 1e-6)]


def test_exact_power_law():
    """Test slope -1 through points on delta_min = 1/N."""
    fit = scaling_fit(INVERSE_N)
    assert fit.slope == pytest.approx(-1.0)
    assert fit.intercept == pytest.approx(0.0, abs=1e-12)
    assert fit.r2 == pytest.approx(1.0)
    assert fit.predict(1e7) == pytest.approx(1e-7)


def test_extrapolation_in_trajectories_and_distance():
    """Test the trajectory count and driving distance for a target delta."""
    fit = scaling_fit(INVERSE_N)
    assert fit.extrapolate(1e-8) == pytest.approx(1e8)
    assert fit.extrapolate_distance_km(1e-8) == pytest.approx(1e8 * KM_PER_TRAJECTORY)
    assert fit.extrapolate_distance_km(1e-8, 1.0) == pytest.approx(1e8)
    with pytest.raises(RangeError):
        fit.extrapolate(0.0)
    with pytest.raises(RangeError):
        fit.extrapolate_distance_km(1e-8, 0.0)


def test_noisy_fit_r2_below_one():
    """Test goodness of fit on scattered points."""
    fit = scaling_fit([(1e3, 2e-3), (1e4, 5e-5), (1e5, 2e-5), (1e6, 5e-7)])
    assert -1.5 < fit.slope < -0.7
    assert 0.0 < fit.r2 < 1.0


def test_scaling_fit_validation():
    """Test point counts, positivity and degenerate inputs."""
    with pytest.raises(RangeError):
        scaling_fit(INVERSE_N[:2])
    with pytest.raises(RangeError):
        scaling_fit([(1e3, 1e-3), (1e4, 0.0), (1e5, 1e-5)])
    with pytest.raises(DegeneracyError):
        scaling_fit([(1e3, 1e-3), (1e3, 1e-4), (1e3, 1e-5)])
    with pytest.raises(DegeneracyError):
        scaling_fit([(1e3, 1e-3), (1e4, 1e-3), (1e5, 1e-3)])


def test_scaling_csv_round_trip(tmp_path):
    """Test writing and reading the fitted points."""
    fit = scaling_fit(INVERSE_N)
    path = tmp_path / "scaling.csv"
    fit.to_csv(path)
    assert read_scaling_csv(path) == INVERSE_N


def test_vc_lower_bound():
    """Test the unit-constant comparator expression."""
    assert vc_lower_bound(VcBoundQuery(0.01, 5)) == pytest.approx(100 * math.log(100) + 500)
    assert vc_lower_bound(VcBoundQuery(1e-8, 5, c1=2.0, c2=0.5)) == pytest.approx(
        2e8 * math.log(1e8) + 2.5e8)
    with pytest.raises(RangeError):
        VcBoundQuery(1.0, 5)
    with pytest.raises(RangeError):
        VcBoundQuery(0.1, 0)
    with pytest.raises(RangeError):
        VcBoundQuery(0.1, 5, c1=0.0)
