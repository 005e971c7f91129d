"""Test cases for random streams and synthetic generators."""
import numpy as np
import pytest
import scipy.stats

from tailcal.config import IngestSchema
from tailcal.core.constants import LANE_INITIAL, LANE_JITTER_SIGMA, LANE_WIDTH
from tailcal.core.exceptions import MatrixError, RangeError
from tailcal.core.rng import RngSpec
from tailcal.core.synth import (
    ModeSpec,
    NoiseKind,
    NoiseSpec,
    gen_gaussian_2d,
    gen_lane_trajectories,
    gen_noisy_gaussian_2d,
    gen_two_mode_1d,
    generate_in_chunks,
    lane_swerve_flags,
    noise_width,
)
from tailcal.ingest import read_scenarios, write_scenarios

SEED = 20240601
COV = np.array([[1.0, 0.3], [0.3, 0.5]])


def test_rng_same_address_same_draws():
    """Test that a stream is a pure function of its address."""
    first = RngSpec(SEED, 2, (5,)).generator().random(8)
    second = RngSpec(SEED, 2, (5,)).generator().random(8)
    np.testing.assert_array_equal(first, second)


def test_rng_children_are_independent_streams():
    """Test that sibling and parent streams differ."""
    root = RngSpec(SEED)
    a = root.child(0).generator().random(4)
    b = root.child(1).generator().random(4)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, root.generator().random(4))
    assert root.child(1, 2) == root.child(1).child(2)


def test_rng_dict_round_trip_and_validation():
    """Test provenance records and seed validation."""
    spec = RngSpec(SEED, 3, (1, 4))
    assert RngSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(RangeError):
        RngSpec(-1)
    with pytest.raises(RangeError):
        RngSpec(1 << 64)


def test_gen_gaussian_2d_moments():
    """Test sample moments of a large Gaussian draw."""
    points = gen_gaussian_2d(200_000, [1.0, -2.0], COV, RngSpec(SEED))
    np.testing.assert_allclose(points.mean(axis=0), [1.0, -2.0], atol=0.01)
    np.testing.assert_allclose(np.cov(points.T), COV, atol=0.01)


def test_gen_gaussian_2d_rejects_bad_covariance():
    """Test covariance validation."""
    with pytest.raises(MatrixError):
        gen_gaussian_2d(10, [0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]], RngSpec(SEED))
    with pytest.raises(MatrixError):
        gen_gaussian_2d(10, [0.0, 0.0], [[1.0, 0.5], [0.0, 1.0]], RngSpec(SEED))
    with pytest.raises(RangeError):
        gen_gaussian_2d(0, [0.0, 0.0], COV, RngSpec(SEED))


def test_noise_free_part_is_shared():
    """Test that noise is added on top of the plain Gaussian draw."""
    rng = RngSpec(SEED, 1)
    base = gen_gaussian_2d(1000, [0.0, 0.0], COV, rng)
    plain = gen_noisy_gaussian_2d(1000, COV, NoiseSpec(NoiseKind.NONE), rng)
    np.testing.assert_array_equal(base, plain)


@pytest.mark.parametrize("kind", [NoiseKind.UNIFORM, NoiseKind.SYMMETRIC_NONUNIFORM])
def test_noise_stays_within_width(kind):
    """Test that additive noise never exceeds its half-width."""
    rng = RngSpec(SEED, 1)
    base = gen_gaussian_2d(5000, [0.0, 0.0], COV, rng)
    width = noise_width(base, 0.3)
    noisy = gen_noisy_gaussian_2d(5000, COV, NoiseSpec(kind, 0.3), rng)
    shift = np.abs(noisy - base)
    assert np.all(shift <= width + 1e-12)
    assert np.all(shift.max(axis=0) > 0.5 * width)


def test_noise_width_can_be_reused():
    """Test that a given width overrides the sample's own range."""
    rng = RngSpec(SEED, 1)
    width = np.array([0.01, 0.01])
    base = gen_gaussian_2d(100, [0.0, 0.0], COV, rng)
    noisy = gen_noisy_gaussian_2d(100, COV, NoiseSpec(NoiseKind.UNIFORM), rng, width=width)
    assert np.all(np.abs(noisy - base) <= 0.01 + 1e-12)


def test_noise_spec_validation():
    """Test noise kinds and fractions."""
    assert NoiseSpec("uniform").kind is NoiseKind.UNIFORM
    with pytest.raises(ValueError):
        NoiseSpec("triangular")
    with pytest.raises(RangeError):
        NoiseSpec(NoiseKind.UNIFORM, 1.5)


def test_generate_in_chunks_worker_invariant():
    """Test that chunked generation does not depend on the worker count."""
    def make(size, rng):
        return gen_gaussian_2d(size, [0.0, 0.0], COV, rng)

    serial = generate_in_chunks(10_000, 1024, make, RngSpec(SEED, 2), workers=1)
    threaded = generate_in_chunks(10_000, 1024, make, RngSpec(SEED, 2), workers=4)
    assert serial.shape == (10_000, 2)
    np.testing.assert_array_equal(serial, threaded)
    np.testing.assert_array_equal(serial[:1024], make(1024, RngSpec(SEED, 2).child(0)))


def test_mode_spec_validation():
    """Test mode parameters."""
    with pytest.raises(RangeError):
        ModeSpec.gaussian(0.0, 0.0, 10)
    with pytest.raises(RangeError):
        ModeSpec.uniform(1.0, -1.0, 10)
    with pytest.raises(RangeError):
        ModeSpec("laplace", 0.0, 1.0, 10)
    with pytest.raises(RangeError):
        ModeSpec.gaussian(0.0, 1.0, 0)


def test_gen_two_mode_1d():
    """Test counts and supports of the two modes."""
    points1, points2 = gen_two_mode_1d(ModeSpec.uniform(-2.0, 1.0, 500),
                                       ModeSpec.gaussian(1.0, 0.5, 300), RngSpec(SEED))
    assert points1.shape == (500,)
    assert points2.shape == (300,)
    assert points1.min() >= -2.0 and points1.max() < 1.0
    assert abs(points2.mean() - 1.0) < 0.1


def test_gen_lane_trajectories():
    """Test lane scenarios: grid, labels and lane keeping."""
    rng = RngSpec(SEED, 1)
    dataset = gen_lane_trajectories(400, 0.2, 10.0, rng)
    swerve = lane_swerve_flags(400, 0.2, rng)

    assert len(dataset) == 400
    assert dataset.sample_rate == 10.0
    assert dataset.context_dim == 3
    assert len(dataset[0].trajectory) == 101
    assert 40 < swerve.sum() < 120
    for scenario, flag in zip(dataset, swerve):
        lateral = scenario.trajectory.positions[:, 1]
        assert scenario.swerve == bool(flag)
        if flag:
            assert scenario.mode_label in (LANE_INITIAL - 1, LANE_INITIAL + 1)
        else:
            assert scenario.mode_label == LANE_INITIAL
            assert np.all(np.abs(lateral - LANE_INITIAL * LANE_WIDTH) < 1.0)


def test_gen_lane_trajectories_without_swerves():
    """Test that p_swerve = 0 keeps every vehicle in its lane."""
    dataset = gen_lane_trajectories(50, 0.0, 10.0, RngSpec(SEED))
    assert {s.mode_label for s in dataset} == {LANE_INITIAL}
    with pytest.raises(RangeError):
        gen_lane_trajectories(5, 1.5, 10.0, RngSpec(SEED))


def test_disjoint_streams_are_uncorrelated():
    """Test cross-correlation between sibling streams on 1e6 draws."""
    n = 1_000_000
    root = RngSpec(SEED)
    streams = [RngSpec(SEED, 0).generator().standard_normal(n),
               RngSpec(SEED, 1).generator().standard_normal(n),
               root.child(7).generator().standard_normal(n)]
    for i in range(3):
        for j in range(i + 1, 3):
            assert abs(np.corrcoef(streams[i], streams[j])[0, 1]) < 4 / np.sqrt(n)


def test_symmetric_nonuniform_noise_has_no_skew():
    """Test per-axis sample skewness of the noise against its standard error."""
    n = 1_000_000
    rng = RngSpec(SEED, 3)
    base = gen_gaussian_2d(n, [0.0, 0.0], COV, rng)
    shift = gen_noisy_gaussian_2d(n, COV, NoiseSpec(NoiseKind.SYMMETRIC_NONUNIFORM), rng) - base
    skew = scipy.stats.skew(shift, axis=0)
    m2, m4, m6 = (scipy.stats.moment(shift, k, axis=0) for k in (2, 4, 6))
    standard_error = np.sqrt((m6 - 6 * m4 * m2 + 9 * m2 ** 3) / (n * m2 ** 3))
    assert np.all(np.abs(skew) < 4 * standard_error)


def test_zero_noise_fraction_is_noise_free():
    """Test that noise_frac = 0 reproduces the plain Gaussian draw."""
    rng = RngSpec(SEED, 4)
    plain = gen_gaussian_2d(2000, [1.0, -1.0], COV, rng)
    for kind in (NoiseKind.UNIFORM, NoiseKind.SYMMETRIC_NONUNIFORM):
        noisy = gen_noisy_gaussian_2d(2000, COV, NoiseSpec(kind, 0.0), rng, mean=(1.0, -1.0))
        np.testing.assert_array_equal(noisy, plain)


def test_forced_swerve_has_one_ramp():
    """Test that p_swerve = 1 gives each vehicle exactly one full lane change."""
    n, rate = 200, 10.0
    rng = RngSpec(SEED, 5)
    dataset = gen_lane_trajectories(n, 1.0, rate, rng)
    jitter = rng.child(1).generator().normal(0.0, LANE_JITTER_SIGMA, size=(n, 101))
    for scenario, noise in zip(dataset, jitter):
        ramp = scenario.trajectory.positions[:, 1] - LANE_INITIAL * LANE_WIDTH - noise
        assert scenario.swerve
        assert scenario.mode_label in (LANE_INITIAL - 1, LANE_INITIAL + 1)
        assert ramp[0] == pytest.approx(0.0, abs=1e-9)
        assert abs(ramp[-1]) == pytest.approx(LANE_WIDTH, abs=1e-9)
        assert np.sign(ramp[-1]) == scenario.mode_label - LANE_INITIAL
        assert np.all(np.diff(np.abs(ramp)) >= -1e-9)


def test_rare_swerve_count_is_binomial():
    """Test the swerve count for p = 1e-3 over 1e6 vehicles."""
    n, p = 1_000_000, 1e-3
    count = int(lane_swerve_flags(n, p, RngSpec(SEED, 6)).sum())
    assert abs(count - n * p) <= 4 * np.sqrt(n * p * (1 - p))


def test_lane_trajectories_survive_csv_round_trip(tmp_path):
    """Test writing generated lanes to CSV and reading them back unchanged."""
    dataset = gen_lane_trajectories(30, 0.3, 10.0, RngSpec(SEED, 7))
    schema = IngestSchema(features=("speed", "lead_gap", "lead_speed"),
                          sample_rate=10.0, segment_seconds=10.0)
    path = tmp_path / "lanes.csv"
    write_scenarios(dataset, path, schema)
    again, report = read_scenarios(path, schema)

    assert not report.malformed_lines
    assert len(again) == len(dataset)
    for before, after in zip(dataset, again):
        np.testing.assert_array_equal(before.trajectory.positions, after.trajectory.positions)
        np.testing.assert_array_equal(before.context.features, after.context.features)
        assert before.mode_label == after.mode_label
        assert after.trajectory.start_time == 0.0
