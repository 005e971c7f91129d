"""Test cases for Gaussian mixture fitting and density thresholds."""
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from tailcal.core.exceptions import DegeneracyError, ResolutionError, SizeError
from tailcal.core.gaussian import GaussianModel, fit_gaussian
from tailcal.core.mixture import (
    EmConfig,
    GmmModel,
    em_step_status,
    fit_action_gmm,
    fit_gmm,
    gmm_density_threshold,
)
from tailcal.core.rng import RngSpec

SEED = 11


def two_clusters(n: int = 2000) -> np.ndarray:
    rng = np.random.default_rng(SEED)
    left = rng.normal([-5.0, 0.0], 0.5, size=(n // 2, 2))
    right = rng.normal([5.0, 1.0], 1.0, size=(n - n // 2, 2))
    return np.vstack([left, right])


def test_single_component_equals_gaussian_fit():
    """Test that K=1 is the Gaussian maximum-likelihood fit."""
    points = np.random.default_rng(SEED).normal(size=(500, 2)) @ np.array([[1.0, 0.4], [0.0, 0.7]])
    mixture = fit_gmm(points, 1, rng=RngSpec(SEED))
    gaussian = fit_gaussian(points)
    np.testing.assert_allclose(mixture.weights, [1.0])
    np.testing.assert_allclose(mixture.components[0].mean, gaussian.mean, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(mixture.components[0].cov, gaussian.cov, rtol=1e-10, atol=1e-12)


def test_two_clusters_are_recovered():
    """Test that EM separates well-separated clusters."""
    mixture = fit_gmm(two_clusters(), 2, rng=RngSpec(SEED))
    order = np.argsort(mixture.means[:, 0])
    np.testing.assert_allclose(mixture.means[order], [[-5.0, 0.0], [5.0, 1.0]], atol=0.15)
    np.testing.assert_allclose(mixture.weights[order], [0.5, 0.5], atol=0.02)
    assert mixture.weights.sum() == pytest.approx(1.0)
    assert mixture.diagnostics.converged


def test_log_likelihood_is_non_decreasing():
    """Test EM monotonicity up to rounding."""
    mixture = fit_gmm(two_clusters(), 3, EmConfig(restarts=2), RngSpec(SEED))
    history = np.array(mixture.diagnostics.ll_history)
    assert np.all(np.diff(history) >= -1e-10 * np.maximum(1.0, np.abs(history[:-1])))


def test_fit_is_reproducible_and_worker_invariant():
    """Test that restarts scheduled on threads select the same fit."""
    points = two_clusters()
    serial = fit_gmm(points, 3, EmConfig(restarts=4, workers=1), RngSpec(SEED))
    threaded = fit_gmm(points, 3, EmConfig(restarts=4, workers=4), RngSpec(SEED))
    np.testing.assert_array_equal(serial.weights, threaded.weights)
    np.testing.assert_array_equal(serial.means, threaded.means)
    assert serial.diagnostics.restart == threaded.diagnostics.restart


def test_fit_gmm_size_checks():
    """Test minimum sample counts."""
    with pytest.raises(SizeError):
        fit_gmm(np.zeros((5, 2)), 2)
    with pytest.raises(SizeError):
        fit_gmm(two_clusters(), 0)


def test_mixture_weights_validated():
    """Test positive weights summing to one."""
    component = GaussianModel([0.0, 0.0], np.eye(2))
    with pytest.raises(DegeneracyError):
        GmmModel([0.7, 0.4], (component, component))
    with pytest.raises(DegeneracyError):
        GmmModel([1.0, 0.0], (component, component))


def test_density_threshold_coverage():
    """Test that fresh draws fall below the threshold at rate delta."""
    mixture = fit_gmm(two_clusters(), 2, rng=RngSpec(SEED))
    threshold = gmm_density_threshold(mixture, 0.05, 200_000, RngSpec(SEED, 9))
    fresh = mixture.sample(200_000, np.random.default_rng(99))
    below = np.mean(np.exp(mixture.logpdf(fresh)) < threshold)
    assert below == pytest.approx(0.05, abs=0.003)


def test_density_threshold_needs_tail_samples():
    """Test that too few Monte-Carlo tail draws are refused."""
    mixture = fit_gmm(two_clusters(), 1, rng=RngSpec(SEED))
    with pytest.raises(ResolutionError):
        gmm_density_threshold(mixture, 1e-6, 1_000_000, RngSpec(SEED))


def test_log_threshold_is_cached():
    """Test that the model reuses its threshold per delta."""
    mixture = fit_gmm(two_clusters(), 2, rng=RngSpec(SEED), mc_samples=20_000)
    first = mixture.log_threshold(0.1)
    assert mixture.log_threshold(0.1) == first
    assert mixture.log_threshold(0.01) < first


def test_fit_action_gmm_per_step():
    """Test one mixture per timestep."""
    rng = np.random.default_rng(SEED)
    actions = rng.normal(size=(300, 3, 2)) + np.arange(3)[None, :, None]
    model = fit_action_gmm(actions, 2, EmConfig(restarts=2), RngSpec(SEED), mc_samples=10_000)
    assert len(model.steps) == 3
    assert model.k == 2
    np.testing.assert_allclose([(s.weights @ s.means)[0] for s in model.steps], [0.0, 1.0, 2.0], atol=0.2)


def test_em_step_status():
    """Test that a log-likelihood drop is flagged rather than read as convergence."""
    assert em_step_status([], -3.0, 1e-6) == "continue"
    assert em_step_status([-3.0], -2.0, 1e-6) == "continue"
    assert em_step_status([-3.0], -3.0 + 1e-9, 1e-6) == "converged"
    assert em_step_status([-3.0], -3.0 - 1e-14, 1e-6) == "converged"
    assert em_step_status([-3.0], -3.1, 1e-6) == "decreased"


def test_diagnostics_record_decreases():
    """Test that a regular fit reports no log-likelihood decreases."""
    mixture = fit_gmm(two_clusters(), 2, rng=RngSpec(SEED))
    assert mixture.diagnostics.decreases == ()
    assert mixture.diagnostics.to_dict()["decreases"] == []


def test_log_threshold_concurrent_queries():
    """Test that concurrent threshold queries agree with a serial one."""
    points = two_clusters()
    threaded = fit_gmm(points, 2, rng=RngSpec(SEED), mc_samples=20_000)
    serial = fit_gmm(points, 2, rng=RngSpec(SEED), mc_samples=20_000)
    deltas = [0.1, 0.01, 0.1, 0.05, 0.01, 0.1] * 4
    with ThreadPoolExecutor(max_workers=6) as pool:
        values = list(pool.map(threaded.log_threshold, deltas))
    assert values == [serial.log_threshold(delta) for delta in deltas]
