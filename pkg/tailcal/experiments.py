"""Experiment recipes: generate data, fit models, audit calibration, write reports."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np
import pandas as pd

from .config import ExperimentConfig
from .const import (
    EXPORT_TUBE,
    FULL_TEST,
    FULL_TRAIN,
    GAUSSIAN_AUDIT,
    GMM_AUDIT,
    HMM_INTERVALS,
    HORIZONS_FILE,
    INGEST,
    INGEST_AUDIT,
    INGEST_REPORT_FILE,
    INTERVALS_FILE,
    LANE_FEATURES,
    LANE_TEST,
    LANE_TRAIN,
    POSTERIOR_FILE,
    QUANTILE_AUDIT,
    QUANTILE_SCALING,
    QUICK_LANE_TEST,
    QUICK_LANE_TRAIN,
    QUICK_SCALING_SIZES,
    QUICK_TEST,
    QUICK_TRAIN_CAP,
    SCALING_FILE,
    SCENARIO_OPT,
    SCENARIOS_FILE,
    SOURCE_CSV,
    SOURCE_GAUSSIAN,
    SOURCE_LANES,
    STREAM_MODEL,
    STREAM_TEST,
    STREAM_TRAIN,
    SUMMARY_FILE,
    TUBE_FILE,
    VIOLATION_CONVENTION,
)
from .core.calibration import CalibrationCurve, calibration_curve, count_violations, delta_min
from .core.constants import MC_MIN_TAIL
from .core.exceptions import (
    ConfigError,
    DataError,
    DegeneracyError,
    MatrixError,
    RangeError,
    SizeError,
)
from .core.gaussian import fit_action_gaussian, fit_gaussian, fit_noisy_rational
from .core.membership import FittedModel, ModeConditionedModel
from .core.mixture import fit_action_gmm, fit_gmm
from .core.modes import decision_intervals, fit_two_mode_classifier, mode_posterior
from .core.scaling import VcBoundQuery, scaling_fit, vc_lower_bound
from .core.synth import (
    NoiseSpec,
    gen_gaussian_2d,
    gen_lane_trajectories,
    gen_noisy_gaussian_2d,
    gen_two_mode_1d,
    generate_in_chunks,
    noise_width,
)
from .core.trajectory import Dataset, prune_training_set
from .core.tubes import campi_violation_bound, fit_quantile_tubes, fit_scenario_hull
from .export import export_tube, level_tails
from .helpers import get_annotation, get_library_info, write_frame, write_json, write_manifest
from .ingest import read_scenarios, split_train_test, write_scenarios

_LOGGER = logging.getLogger(__name__)

# Stands in for a missing mode label in label arrays.
NO_LABEL = np.iinfo(np.int64).min
POSTERIOR_POINTS = 401


@dataclass
class RunResult:
    """Files and summary of one finished run."""

    kind: str
    out_dir: Path
    files: list[Path]
    summary: dict[str, Any]


class _Outputs:
    """Collects every file a run writes, for the manifest."""

    def __init__(self, out_dir: Path) -> None:
        self.out_dir = out_dir
        self.files: list[Path] = []

    def curve(self, name: str, curve: CalibrationCurve) -> str:
        path = self.out_dir / name
        curve.to_csv(path)
        self.files.append(path)
        return name

    def frame(self, name: str, frame: pd.DataFrame) -> str:
        self.files.append(write_frame(self.out_dir / name, frame))
        return name

    def json(self, name: str, payload: dict[str, Any]) -> str:
        self.files.append(write_json(self.out_dir / name, payload))
        return name

    def track(self, path: Path) -> str:
        self.files.append(path)
        return path.name

    def same_bytes(self, first: str, second: str) -> bool:
        return (self.out_dir / first).read_bytes() == (self.out_dir / second).read_bytes()


@dataclass
class _ActionData:
    """Windowed train and test actions with their mode labels."""

    train: np.ndarray
    train_labels: np.ndarray
    test: np.ndarray
    test_labels: np.ndarray
    sample_rate: float
    source: str
    ingest: dict[str, Any] | None = None
    n_before_pruning: int | None = None


def _uses_scenarios(cfg: ExperimentConfig) -> bool:
    return cfg.data["source"] in (SOURCE_LANES, SOURCE_CSV)


def _sizes(cfg: ExperimentConfig, scenarios: bool | None = None) -> tuple[int, int]:
    """Train and test counts for the run, capped in quick mode."""
    if scenarios is None:
        scenarios = _uses_scenarios(cfg)
    n_train = cfg.data.get("n_train") or (LANE_TRAIN if scenarios else FULL_TRAIN)
    n_test = cfg.data.get("n_test") or (LANE_TEST if scenarios else FULL_TEST)
    if cfg.quick:
        n_train = min(n_train, QUICK_LANE_TRAIN if scenarios else QUICK_TRAIN_CAP)
        n_test = min(n_test, QUICK_LANE_TEST if scenarios else QUICK_TEST)
    return n_train, n_test


def _mean_cov(cfg: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
    mean = np.asarray(cfg.data["mean"], dtype=float)
    cov = np.asarray(cfg.data["cov"], dtype=float)
    if cov.size != mean.size * mean.size:
        raise ConfigError(f"[data] cov has {cov.size} entries, a {mean.size}D mean needs {mean.size ** 2}")
    return mean, cov.reshape(mean.size, mean.size)


def _gaussian_points(cfg: ExperimentConfig, noise: NoiseSpec, variant: int,
                     n_train: int, n_test: int) -> tuple[np.ndarray, np.ndarray]:
    """Noisy Gaussian train and test points; the test noise reuses the training width."""
    mean, cov = _mean_cov(cfg)
    train_rng = cfg.rng.child(STREAM_TRAIN, variant)
    width = noise_width(gen_gaussian_2d(n_train, mean, cov, train_rng), noise.noise_frac)
    train = gen_noisy_gaussian_2d(n_train, cov, noise, train_rng, mean, width)

    def make(size: int, rng) -> np.ndarray:
        return gen_noisy_gaussian_2d(size, cov, noise, rng, mean, width)

    test = generate_in_chunks(n_test, cfg.data["chunk_size"], make,
                              cfg.rng.child(STREAM_TEST, variant), cfg.workers)
    _LOGGER.info("Generated %d train and %d test points with %s noise", n_train, n_test, noise.kind.value)
    return train, test


def _scenario_source(cfg: ExperimentConfig) -> str:
    source = cfg.data["source"]
    if source == SOURCE_GAUSSIAN:
        _LOGGER.info("%s needs scenarios; using synthetic lanes", cfg.kind)
        return SOURCE_LANES
    return source


def _datasets(cfg: ExperimentConfig, need_test: bool = True) -> tuple[Dataset, Dataset | None, dict | None]:
    """Train and test scenarios from the configured source."""
    source = _scenario_source(cfg)
    report: dict[str, Any] | None = None
    if source == SOURCE_LANES:
        n_train, n_test = _sizes(cfg, scenarios=True)
        rate, p_swerve = cfg.data["sample_rate"], cfg.data["p_swerve"]
        train = gen_lane_trajectories(n_train, p_swerve, rate, cfg.rng.child(STREAM_TRAIN))
        test = None
        if need_test:
            generated = gen_lane_trajectories(n_test, p_swerve, rate, cfg.rng.child(STREAM_TEST))
            test = generated.subset(range(len(generated)), role="test")
    else:
        train, train_report = read_scenarios(cfg.data["path"], cfg.schema)
        report = {"train": train_report.to_dict()}
        if "test_path" in cfg.data:
            test, test_report = read_scenarios(cfg.data["test_path"], cfg.schema, role="test")
            report["test"] = test_report.to_dict()
        else:
            train, test = split_train_test(train, cfg.schema.test_fraction, cfg.rng.child(STREAM_TEST))
    _LOGGER.info("Loaded %d train and %d test scenarios from %s",
                 len(train), len(test) if test is not None else 0, source)
    return train, test, report


def _labels(dataset: Dataset) -> np.ndarray:
    return np.array([NO_LABEL if s.mode_label is None else s.mode_label for s in dataset], dtype=np.int64)


def _action_data(cfg: ExperimentConfig, horizon: float | None = None) -> _ActionData:
    """Scenario data cut at the split time to the first `horizon` seconds."""
    horizon = cfg.model["window"] if horizon is None else horizon
    train, test, report = _datasets(cfg)
    n_before = None
    if cfg.pruning is not None:
        n_before = len(train)
        train = prune_training_set(test, train, cfg.pruning, cfg.workers)
        if len(train) < 3:
            raise DataError(f"pruning left {len(train)} training scenarios",
                            {"before": n_before, "after": len(train)})
        _LOGGER.info("Pruning kept %d of %d training scenarios", len(train), n_before)
    split = cfg.model["split"]
    return _ActionData(
        train=train.action_windows(split, horizon),
        train_labels=_labels(train),
        test=test.action_windows(split, horizon),
        test_labels=_labels(test),
        sample_rate=train.sample_rate,
        source=_scenario_source(cfg),
        ingest=report,
        n_before_pruning=n_before,
    )


def _fit_by_mode(cfg: ExperimentConfig, fit: Callable[[np.ndarray], FittedModel],
                 actions: np.ndarray, labels: np.ndarray) -> FittedModel:
    """Fit one model, or one per mode label when conditioning on modes."""
    if not cfg.model["condition_on_mode"]:
        return fit(actions)
    models = {}
    for label in np.unique(labels):
        if label == NO_LABEL:
            continue
        rows = labels == label
        try:
            models[int(label)] = fit(actions[rows])
        except (SizeError, DegeneracyError, MatrixError, RangeError) as err:
            _LOGGER.warning("No model for mode %d (%d actions): %s", label, int(rows.sum()), err)
    if not models:
        raise DataError("no mode has enough training actions to fit a model")
    return ModeConditionedModel(models)


def _audit(cfg: ExperimentConfig, out: _Outputs, name: str, model: FittedModel, test: np.ndarray,
           labels: np.ndarray | None = None, grid=None) -> dict[str, Any]:
    """Calibration curve and delta_min of one model on one test set."""
    grid = grid or cfg.grid
    if not isinstance(model, ModeConditionedModel):
        labels = None
    curve = calibration_curve(model, test, grid, workers=cfg.workers, labels=labels)
    result = delta_min(curve, cfg.model["eta"], cfg.model["delta_rule"])
    _LOGGER.info("%s: delta_min=%s over %d test trials", name, result.delta_min, curve.n_test)
    return {
        "curve": out.curve(f"{name}.csv", curve),
        "model_class": curve.model_class,
        "n_test": curve.n_test,
        "assessable_below": min((p.delta for p in curve.points if p.assessable), default=None),
        **result.to_dict(),
    }


def _action_summary(data: _ActionData) -> dict[str, Any]:
    summary = {
        "source": data.source,
        "n_train": len(data.train),
        "n_test": len(data.test),
        "steps": data.train.shape[1],
        "sample_rate": data.sample_rate,
    }
    if data.source == SOURCE_LANES:
        summary["context_features"] = list(LANE_FEATURES)
    if data.n_before_pruning is not None:
        summary["n_train_before_pruning"] = data.n_before_pruning
    return summary


def run_gaussian_audit(cfg: ExperimentConfig, out: _Outputs) -> dict[str, Any]:
    """Gaussian and noisy-rational fits against each noise kind."""
    if _uses_scenarios(cfg):
        data = _action_data(cfg)
        model = _fit_by_mode(cfg, lambda a: fit_action_gaussian(a, cfg.model["region"]),
                             data.train, data.train_labels)
        return {**_action_summary(data), "region": cfg.model["region"],
                "gaussian": _audit(cfg, out, "gaussian", model, data.test, data.test_labels)}

    n_train, n_test = _sizes(cfg)
    variants = {}
    for index, noise in enumerate(cfg.noise_specs()):
        train, test = _gaussian_points(cfg, noise, index, n_train, n_test)
        kind = noise.kind.value
        entry: dict[str, Any] = {"annotation": get_annotation(GAUSSIAN_AUDIT, kind)}
        for model in (fit_gaussian(train), fit_noisy_rational(train)):
            entry[model.model_class] = _audit(cfg, out, f"{model.model_class}_{kind}", model, test)
        entry["noisy_rational_identical"] = out.same_bytes(entry["gaussian"]["curve"],
                                                           entry["noisy_rational"]["curve"])
        variants[kind] = entry
    return {"source": SOURCE_GAUSSIAN, "n_train": n_train, "n_test": n_test,
            "noise_frac": cfg.data["noise_frac"], "variants": variants}


def run_gmm_audit(cfg: ExperimentConfig, out: _Outputs) -> dict[str, Any]:
    """Mixtures of increasing size against each noise kind."""
    mc_samples = cfg.model["mc_samples"]
    # The density threshold needs at least MC_MIN_TAIL samples beyond it.
    grid = cfg.grid.limited(MC_MIN_TAIL / mc_samples)
    if not len(grid):
        raise RangeError(f"mc_samples={mc_samples} resolves no delta on the grid")
    common = {"mc_samples": mc_samples, "grid_smallest": grid.deltas[-1], "k": list(cfg.model["k"])}

    if _uses_scenarios(cfg):
        data = _action_data(cfg)
        fits = {}
        for k in cfg.model["k"]:
            def fit(actions: np.ndarray, k: int = k) -> FittedModel:
                return fit_action_gmm(actions, k, cfg.em, cfg.rng.child(STREAM_MODEL, 0, k), mc_samples)
            model = _fit_by_mode(cfg, fit, data.train, data.train_labels)
            fits[f"k{k}"] = _audit(cfg, out, f"gmm_k{k}", model, data.test, data.test_labels, grid)
        return {**_action_summary(data), **common, "fits": fits}

    n_train, n_test = _sizes(cfg)
    variants = {}
    for index, noise in enumerate(cfg.noise_specs()):
        train, test = _gaussian_points(cfg, noise, index, n_train, n_test)
        kind = noise.kind.value
        fits = {}
        for k in cfg.model["k"]:
            model = fit_gmm(train, k, cfg.em, cfg.rng.child(STREAM_MODEL, index, k), mc_samples)
            fits[f"k{k}"] = {**_audit(cfg, out, f"gmm_k{k}_{kind}", model, test, grid=grid),
                             "em": model.diagnostics.to_dict() if model.diagnostics else None,
                             "weights": model.weights}
        variants[kind] = fits
    return {"source": SOURCE_GAUSSIAN, "n_train": n_train, "n_test": n_test, **common,
            "variants": variants}


def run_quantile_audit(cfg: ExperimentConfig, out: _Outputs) -> dict[str, Any]:
    """Greedy quantile tubes over the whole delta grid."""
    deltas = cfg.grid.deltas
    if _uses_scenarios(cfg):
        data = _action_data(cfg)
        model = _fit_by_mode(cfg, lambda a: fit_quantile_tubes(a, deltas), data.train, data.train_labels)
        return {**_action_summary(data),
                "quantile": _audit(cfg, out, "quantile", model, data.test, data.test_labels)}

    n_train, n_test = _sizes(cfg)
    variants = {}
    for index, noise in enumerate(cfg.noise_specs()):
        train, test = _gaussian_points(cfg, noise, index, n_train, n_test)
        tubes = fit_quantile_tubes(train, deltas)
        variants[noise.kind.value] = _audit(cfg, out, f"quantile_{noise.kind.value}", tubes, test[:, None, :])
    return {"source": SOURCE_GAUSSIAN, "n_train": n_train, "n_test": n_test,
            "one_over_n": 1.0 / n_train, "variants": variants}


def run_quantile_scaling(cfg: ExperimentConfig, out: _Outputs) -> dict[str, Any]:
    """delta_min of quantile tubes across training sizes, and its extrapolation."""
    sizes = [n for n in cfg.data["sizes"] if not cfg.quick or n <= max(QUICK_SCALING_SIZES)]
    _, n_test = _sizes(cfg, scenarios=False)
    mean, cov = _mean_cov(cfg)
    test = generate_in_chunks(n_test, cfg.data["chunk_size"],
                              lambda size, rng: gen_gaussian_2d(size, mean, cov, rng),
                              cfg.rng.child(STREAM_TEST), cfg.workers)[:, None, :]

    per_size, points = {}, []
    for index, n in enumerate(sizes):
        train = gen_gaussian_2d(n, mean, cov, cfg.rng.child(STREAM_TRAIN, index))
        tubes = fit_quantile_tubes(train, cfg.grid.deltas)
        entry = _audit(cfg, out, f"quantile_n{n}", tubes, test)
        per_size[str(n)] = entry
        if entry["delta_min"] is not None:
            points.append((n, entry["delta_min"]))
    if len(points) < 3:
        raise DegeneracyError(f"only {len(points)} training sizes reached an accurate delta",
                              {"sizes": sizes, "points": points})

    fit = scaling_fit(points)
    fit.to_csv(out.out_dir / SCALING_FILE)
    out.track(out.out_dir / SCALING_FILE)
    km = cfg.model["km_per_trajectory"]
    targets = {
        repr(target): {
            "n_train": fit.extrapolate(target),
            "distance_km": fit.extrapolate_distance_km(target, km),
            "vc_lower_bound": vc_lower_bound(VcBoundQuery(target, cfg.model["vcdim"])),
        }
        for target in cfg.model["delta_targets"]
    }
    _LOGGER.info("Scaling slope %.3f (r2 %.3f) over %d sizes", fit.slope, fit.r2, len(points))
    return {"source": SOURCE_GAUSSIAN, "n_test": n_test, "sizes": sizes, "per_size": per_size,
            "fit": fit.to_dict(), "scaling": SCALING_FILE, "km_per_trajectory": km,
            "vcdim": cfg.model["vcdim"], "targets": targets}


def _hull_row(horizon: float, mode: str, train: np.ndarray, test: np.ndarray, beta: float) -> dict[str, Any]:
    hull = fit_scenario_hull(train)
    try:
        epsilon = campi_violation_bound(hull.n_train, hull.support_count, beta)
    except RangeError as err:
        _LOGGER.warning("No bound for horizon %g, mode %s: %s", horizon, mode, err)
        epsilon = float("nan")
    observed, n_test = count_violations(hull, test, beta) if len(test) else (0, 0)
    return {
        "horizon": horizon,
        "mode": mode,
        "n_train": hull.n_train,
        "support_count": hull.support_count,
        "epsilon": epsilon,
        "n_test": n_test,
        "observed_violations": observed,
        "observed_fraction": observed / n_test if n_test else float("nan"),
    }


def run_scenario_opt(cfg: ExperimentConfig, out: _Outputs) -> dict[str, Any]:
    """Scenario hulls and their violation bounds across horizons."""
    beta = cfg.model["beta"]
    train_ds, test_ds, report = _datasets(cfg)
    split = cfg.model["split"]
    train_labels, test_labels = _labels(train_ds), _labels(test_ds)
    rows = []
    for horizon in cfg.model["horizons"]:
        train = train_ds.action_windows(split, horizon)
        test = test_ds.action_windows(split, horizon)
        if not cfg.model["condition_on_mode"]:
            rows.append(_hull_row(horizon, "all", train, test, beta))
            continue
        for label in np.unique(train_labels):
            if label == NO_LABEL:
                continue
            try:
                rows.append(_hull_row(horizon, str(label), train[train_labels == label],
                                      test[test_labels == label], beta))
            except SizeError as err:
                _LOGGER.warning("Skipping mode %d at horizon %g: %s", label, horizon, err)
    if not rows:
        raise DataError("no scenario hull could be fitted")
    frame = pd.DataFrame(rows)
    out.frame(HORIZONS_FILE, frame)
    summary: dict[str, Any] = {"source": _scenario_source(cfg), "beta": beta, "n_train": len(train_ds),
                               "n_test": len(test_ds), "horizons": HORIZONS_FILE, "rows": rows}
    if report:
        summary["ingest"] = report
    return summary


def run_hmm_intervals(cfg: ExperimentConfig, out: _Outputs) -> dict[str, Any]:
    """Confident decision intervals of two-mode classifiers."""
    delta, lo, hi, grid = (cfg.modes[k] for k in ("delta", "lo", "hi", "grid"))
    xs = np.linspace(lo, hi, POSTERIOR_POINTS)
    interval_rows, posterior_rows, sets = [], [], {}
    for index, mode_set in enumerate(cfg.mode_sets):
        points1, points2 = gen_two_mode_1d(mode_set.mode1, mode_set.mode2, cfg.rng.child(STREAM_TRAIN, index))
        classifier = fit_two_mode_classifier(points1, points2)
        intervals = decision_intervals(classifier, delta, lo, hi, grid)
        interval_rows += [(mode_set.name, label, a, b) for label, a, b in intervals.rows()]
        p1, p2 = mode_posterior(classifier, xs)
        posterior_rows.append(pd.DataFrame({"set": mode_set.name, "x": xs, "p_mode1": p1, "p_mode2": p2}))
        sets[mode_set.name] = {
            "mode1": str(mode_set.mode1),
            "mode2": str(mode_set.mode2),
            "means": classifier.means,
            "sigmas": classifier.sigmas,
            "coverage": {label: intervals.coverage(label) for label in ("mode1", "mode2", "gray")},
        }
        _LOGGER.info("Mode set %s: gray coverage %.3f", mode_set.name, intervals.coverage("gray"))
    out.frame(INTERVALS_FILE, pd.DataFrame(interval_rows, columns=["set", "label", "start", "end"]))
    out.frame(POSTERIOR_FILE, pd.concat(posterior_rows, ignore_index=True))
    return {"delta": delta, "bounds": [lo, hi], "grid": grid, "intervals": INTERVALS_FILE,
            "posterior": POSTERIOR_FILE, "sets": sets}


def run_ingest_audit(cfg: ExperimentConfig, out: _Outputs) -> dict[str, Any]:
    """Calibration of Gaussian and quantile models on recorded scenarios."""
    if cfg.data["source"] != SOURCE_CSV:
        raise ConfigError(f"{INGEST_AUDIT} needs [data] source = csv")
    data = _action_data(cfg)
    gaussian = _fit_by_mode(cfg, lambda a: fit_action_gaussian(a, cfg.model["region"]),
                            data.train, data.train_labels)
    quantile = _fit_by_mode(cfg, lambda a: fit_quantile_tubes(a, cfg.grid.deltas),
                            data.train, data.train_labels)
    out.json(INGEST_REPORT_FILE, data.ingest or {})
    return {
        **_action_summary(data),
        "ingest_report": INGEST_REPORT_FILE,
        "gaussian": _audit(cfg, out, "gaussian", gaussian, data.test, data.test_labels),
        "quantile": _audit(cfg, out, "quantile", quantile, data.test, data.test_labels),
    }


def run_ingest(cfg: ExperimentConfig, out: _Outputs) -> dict[str, Any]:
    """Parse a scenario CSV and write it back canonically."""
    if "path" not in cfg.data:
        raise ConfigError("ingest needs [data] path")
    dataset, report = read_scenarios(cfg.data["path"], cfg.schema)
    path = out.out_dir / SCENARIOS_FILE
    write_scenarios(dataset, path, cfg.schema)
    out.track(path)
    out.json(INGEST_REPORT_FILE, report.to_dict())
    return {"scenarios": SCENARIOS_FILE, "count": len(dataset), "ingest_report": INGEST_REPORT_FILE,
            "layout": cfg.schema.layout}


def run_export_tube(cfg: ExperimentConfig, out: _Outputs) -> dict[str, Any]:
    """Fit a per-timestep Gaussian on the whole action and export its sigma tube."""
    train, _, report = _datasets(cfg, need_test=False)
    mode_label = cfg.export.get("mode_label")
    if mode_label is not None:
        train = train.with_mode(mode_label)
        if len(train) < 3:
            raise DataError(f"mode {mode_label} has {len(train)} training scenarios")
    actions = train.action_windows(cfg.model["split"])
    model = fit_action_gaussian(actions, "per_step")
    levels = cfg.export["levels"]
    export_tube(model, mode_label, levels, out.out_dir / TUBE_FILE, train.sample_rate)
    out.track(out.out_dir / TUBE_FILE)
    return {"tube": TUBE_FILE, "mode_label": mode_label, "n_train": len(train),
            "steps": actions.shape[1], "level_tails": level_tails(levels)}


RECIPES: dict[str, Callable[[ExperimentConfig, _Outputs], dict[str, Any]]] = {
    GAUSSIAN_AUDIT: run_gaussian_audit,
    GMM_AUDIT: run_gmm_audit,
    QUANTILE_AUDIT: run_quantile_audit,
    QUANTILE_SCALING: run_quantile_scaling,
    SCENARIO_OPT: run_scenario_opt,
    HMM_INTERVALS: run_hmm_intervals,
    INGEST_AUDIT: run_ingest_audit,
    INGEST: run_ingest,
    EXPORT_TUBE: run_export_tube,
}


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Run the configured recipe and write its reports, summary and manifest."""
    out_dir = Path(cfg.output)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise ConfigError(f"cannot create output directory {out_dir}: {err}") from err
    _LOGGER.info("Running %s with seed %d%s", cfg.kind, cfg.rng.seed, " (quick)" if cfg.quick else "")

    outputs = _Outputs(out_dir)
    summary = RECIPES[cfg.kind](cfg, outputs)
    summary.update({
        "kind": cfg.kind,
        "quick": cfg.quick,
        "annotation": get_annotation(cfg.kind),
        "violation_convention": VIOLATION_CONVENTION,
        "config_sha256": cfg.digest(),
        "rng": cfg.rng.to_dict(),
        "library": get_library_info(),
    })
    outputs.json(SUMMARY_FILE, summary)
    write_manifest(out_dir, cfg.digest(), cfg.rng.to_dict(), cfg.kind, outputs.files)
    _LOGGER.info("Wrote %d files to %s", len(outputs.files) + 1, out_dir)
    return RunResult(cfg.kind, out_dir, outputs.files, summary)
