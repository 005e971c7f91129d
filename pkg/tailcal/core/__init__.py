"""Numerical core of tailcal: scenarios, generators, models and calibration."""
from .calibration import (
    CalibrationCurve,
    CalibrationPoint,
    DeltaGrid,
    DeltaMinResult,
    calibration_curve,
    count_violations,
    default_grid,
    delta_min,
)
from .exceptions import (
    ConfigError,
    DataError,
    DegeneracyError,
    GridError,
    MatrixError,
    NumericalError,
    RangeError,
    ResolutionError,
    SchemaError,
    SizeError,
    TailcalError,
    UnsupportedQueryError,
)
from .gaussian import (
    ActionGaussian,
    GaussianModel,
    fit_action_gaussian,
    fit_gaussian,
    fit_noisy_rational,
    gaussian_region_radius,
    gaussian_two_sided_tail,
    two_sided_radius,
)
from .membership import ModeConditionedModel, contains, contains_many
from .mixture import ActionGmm, EmConfig, GmmModel, fit_action_gmm, fit_gmm, gmm_density_threshold
from .modes import (
    DecisionIntervals,
    TwoModeClassifier,
    decision_intervals,
    fit_two_mode_classifier,
    mode_posterior,
)
from .rng import RngSpec
from .scaling import ScalingFit, VcBoundQuery, scaling_fit, vc_lower_bound
from .serialization import model_from_document, model_to_document
from .synth import (
    LaneConfig,
    ModeSpec,
    NoiseKind,
    NoiseSpec,
    gen_gaussian_2d,
    gen_lane_trajectories,
    gen_noisy_gaussian_2d,
    gen_two_mode_1d,
)
from .trajectory import (
    Dataset,
    EnvironmentContext,
    PruningConfig,
    Scenario,
    StateAction,
    Trajectory,
    equivalent_scenarios,
    prune_training_set,
    replan_window,
    split_state_action,
)
from .tubes import (
    QuantileTube,
    QuantileTubeSet,
    ScenarioHull,
    campi_violation_bound,
    fit_quantile_tube,
    fit_quantile_tubes,
    fit_scenario_hull,
)

__all__ = [
    "ActionGaussian", "ActionGmm", "CalibrationCurve", "CalibrationPoint", "ConfigError",
    "DataError", "Dataset", "DecisionIntervals", "DegeneracyError", "DeltaGrid", "DeltaMinResult",
    "EmConfig", "EnvironmentContext", "GaussianModel", "GmmModel", "GridError", "LaneConfig",
    "MatrixError", "ModeConditionedModel", "ModeSpec", "NoiseKind", "NoiseSpec", "NumericalError",
    "PruningConfig", "QuantileTube", "QuantileTubeSet", "RangeError", "ResolutionError", "RngSpec",
    "ScalingFit", "Scenario", "ScenarioHull", "SchemaError", "SizeError", "StateAction",
    "TailcalError", "Trajectory", "TwoModeClassifier", "UnsupportedQueryError", "VcBoundQuery",
    "calibration_curve", "campi_violation_bound", "contains", "contains_many", "count_violations",
    "decision_intervals", "default_grid", "delta_min", "equivalent_scenarios", "fit_action_gaussian",
    "fit_action_gmm", "fit_gaussian", "fit_gmm", "fit_noisy_rational", "fit_quantile_tube",
    "fit_quantile_tubes", "fit_scenario_hull", "fit_two_mode_classifier", "gaussian_region_radius",
    "gaussian_two_sided_tail", "gen_gaussian_2d", "gen_lane_trajectories", "gen_noisy_gaussian_2d",
    "gen_two_mode_1d", "gmm_density_threshold", "mode_posterior", "model_from_document",
    "model_to_document", "prune_training_set", "replan_window", "scaling_fit", "split_state_action",
    "two_sided_radius", "vc_lower_bound",
]
