"""Test cases for experiment recipes and their reports."""
import json

import numpy as np
import pandas as pd
import pytest

from tailcal.config import build_config
from tailcal.core.exceptions import ConfigError, DataError
from tailcal.experiments import run_experiment
from tailcal.helpers import sha256_file

GAUSSIAN_DATA = {"n_train": "2000", "n_test": "40000", "chunk_size": "10000", "noise": "none, uniform"}
LANE_DATA = {"source": "lanes", "n_train": "200", "n_test": "100", "p_swerve": "0.2"}


def run(tmp_path, name, kind, sections=None, **overrides):
    """Build a config writing below tmp_path and run it."""
    cfg = build_config({"experiment": {"kind": kind, "seed": "20"}, **(sections or {})},
                       {"output": str(tmp_path / name), **overrides})
    return run_experiment(cfg)


def read_json(path):
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def test_hmm_intervals_reports(tmp_path):
    """Test the interval and posterior files and the manifest hashes."""
    result = run(tmp_path, "hmm", "hmm_intervals", {"modes": {"delta": "1e-4"}})
    out = result.out_dir
    intervals = pd.read_csv(out / "intervals.csv")
    posterior = pd.read_csv(out / "posterior.csv")
    assert list(intervals.columns) == ["set", "label", "start", "end"]
    assert set(intervals["set"]) == {"gaussian", "uniform"}
    assert len(posterior) == 2 * 401
    np.testing.assert_allclose(posterior["p_mode1"] + posterior["p_mode2"], 1.0)

    summary = read_json(out / "summary.json")
    assert summary["kind"] == "hmm_intervals"
    assert summary["rng"]["seed"] == 20
    for entry in summary["sets"].values():
        assert sum(entry["coverage"].values()) == pytest.approx(1.0)

    manifest = read_json(out / "manifest.json")
    assert set(manifest["files"]) == {"intervals.csv", "posterior.csv", "summary.json"}
    for name, digest in manifest["files"].items():
        assert sha256_file(out / name) == digest
    assert manifest["config_sha256"] == summary["config_sha256"]


def test_gaussian_audit_is_deterministic_across_workers(tmp_path):
    """Test byte-identical reports for reruns and for any worker count."""
    sections = {"data": GAUSSIAN_DATA, "model": {"grid": "0.1, 0.01"}}
    first = run(tmp_path, "one", "gaussian_audit", sections, workers=1)
    second = run(tmp_path, "three", "gaussian_audit", sections, workers=3)
    names = sorted(path.name for path in first.files)
    assert names == sorted(path.name for path in second.files)
    assert "gaussian_none.csv" in names and "noisy_rational_uniform.csv" in names
    for name in names + ["manifest.json"]:
        assert (first.out_dir / name).read_bytes() == (second.out_dir / name).read_bytes()

    variants = first.summary["variants"]
    assert variants["none"]["noisy_rational_identical"]
    assert variants["uniform"]["noisy_rational_identical"]
    assert variants["none"]["gaussian"]["n_test"] == 40_000


def test_seed_changes_the_results(tmp_path):
    """Test that a different seed draws different data."""
    sections = {"data": GAUSSIAN_DATA, "model": {"grid": "0.1, 0.01"}}
    first = run(tmp_path, "a", "gaussian_audit", sections)
    second = run(tmp_path, "b", "gaussian_audit", sections, seed=21)
    assert (first.out_dir / "gaussian_none.csv").read_bytes() != (second.out_dir / "gaussian_none.csv").read_bytes()
    assert first.summary["config_sha256"] != second.summary["config_sha256"]


def test_scenario_opt_rows(tmp_path):
    """Test one hull row per horizon, and per mode when conditioning."""
    result = run(tmp_path, "hull", "scenario_opt", {"data": LANE_DATA})
    frame = pd.read_csv(result.out_dir / "horizons.csv")
    assert frame["horizon"].tolist() == [2.0, 4.0, 6.0]
    assert (frame["n_train"] == 200).all()
    assert (frame["n_test"] == 100).all()
    assert (frame["support_count"] >= 3).all()

    by_mode = run(tmp_path, "hull_modes", "scenario_opt",
                  {"data": LANE_DATA, "model": {"condition_on_mode": "true", "horizons": "2"}})
    modes = pd.read_csv(by_mode.out_dir / "horizons.csv", dtype={"mode": str})
    assert "1" in set(modes["mode"])
    assert modes["n_train"].sum() <= 200


def test_export_tube_on_lanes(tmp_path):
    """Test the tube file of a per-step Gaussian on synthetic lanes."""
    result = run(tmp_path, "tube", "export_tube",
                 {"data": LANE_DATA, "export": {"levels": "1, 3", "mode_label": "1"}})
    frame = pd.read_csv(result.out_dir / "tube.csv")
    assert len(frame) == result.summary["steps"] == 80
    assert (frame["mode_label"] == 1).all()
    assert (frame["upper_y_3"] >= frame["upper_y_1"]).all()
    assert frame["time"].iloc[0] == pytest.approx(0.1)


def test_ingest_round_trip(tmp_path):
    """Test that ingest writes a file which ingests to itself."""
    source = tmp_path / "tracks.csv"
    rows = ["track_id,frame,x,y,lane"]
    for track in range(3):
        rows += [f"{track},{frame},{frame * 0.5},{track},{track}" for frame in range(7)]
    source.write_text("\n".join(rows) + "\n", encoding="utf-8")
    schema = {"sample_rate": "2", "segment_seconds": "1"}

    first = run(tmp_path, "first", "ingest", {"data": {"path": str(source)}, "schema": schema})
    assert first.summary["count"] == 9
    again = run(tmp_path, "second", "ingest",
                {"data": {"path": str(first.out_dir / "scenarios.csv")}, "schema": schema})
    assert (first.out_dir / "scenarios.csv").read_bytes() == (again.out_dir / "scenarios.csv").read_bytes()
    assert read_json(first.out_dir / "ingest_report.json")["tracks"] == 3


def test_recipe_errors(tmp_path):
    """Test configuration and data errors raised by recipes."""
    with pytest.raises(ConfigError):
        run(tmp_path, "audit", "ingest_audit")
    with pytest.raises(ConfigError):
        run(tmp_path, "ingest", "ingest")
    with pytest.raises(DataError):
        run(tmp_path, "tube", "export_tube", {"data": LANE_DATA, "export": {"mode_label": "9"}})


@pytest.mark.slow
def test_quick_quantile_scaling(tmp_path):
    """Test the scaling fit of a quick run."""
    result = run(tmp_path, "scaling", "quantile_scaling",
                 {"data": {"sizes": "1000, 3162, 10000"}, "model": {"grid": "0.1, 0.03162, 0.01, 0.003162, 0.001"}},
                 quick=True)
    scaling = pd.read_csv(result.out_dir / "scaling.csv")
    assert len(scaling) == 3
    assert result.summary["fit"]["slope"] < 0
    assert result.summary["targets"]["1e-08"]["vc_lower_bound"] > 1e8
