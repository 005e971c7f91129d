"""Experiment configuration: INI files validated by voluptuous schemas."""
from __future__ import annotations

import configparser
import hashlib
import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any

import voluptuous as vol

from .const import (
    EXPERIMENT_KINDS,
    HORIZONS,
    LAYOUT_LONG,
    LAYOUT_WIDE,
    SCALING_SIZES,
    SECTION_DATA,
    SECTION_EXPERIMENT,
    SECTION_EXPORT,
    SECTION_MODEL,
    SECTION_MODES,
    SECTION_PRUNING,
    SECTION_SCHEMA,
    SOURCE_CSV,
    SOURCE_GAUSSIAN,
    SOURCE_LANES,
    TOOL_KINDS,
)
from .core.calibration import DeltaGrid
from .core.constants import (
    CONTEXT_SENTINEL,
    EM_COV_FLOOR,
    EM_MAX_ITER,
    EM_RESTARTS,
    EM_TOL,
    EPSILON_ENV,
    EPSILON_TRAJ,
    ETA,
    MC_SAMPLES,
    MIN_INTERVAL_GRID,
    NOISE_FRACTION,
    REPLAN_HORIZON,
    SCENARIO_BETA,
    SCENARIO_DURATION,
    STATE_SECONDS,
)
from .core.exceptions import ConfigError
from .core.mixture import EmConfig
from .core.rng import RngSpec
from .core.scaling import KM_PER_TRAJECTORY
from .core.synth import ModeSpec, NoiseKind, NoiseSpec
from .core.trajectory import PruningConfig

_LOGGER = logging.getLogger(__name__)

CONF_KIND = "kind"
CONF_OUTPUT = "output"
CONF_SEED = "seed"
CONF_STREAM = "stream"
CONF_QUICK = "quick"
CONF_WORKERS = "workers"


def _split(value: Any) -> list[str]:
    if isinstance(value, (list, tuple)):
        return [str(v).strip() for v in value]
    return [part.strip() for part in str(value).split(",") if part.strip()]


def floats(value: Any) -> list[float]:
    """Comma-separated floats."""
    try:
        return [float(v) for v in _split(value)]
    except ValueError as err:
        raise vol.Invalid(f"expected comma-separated numbers, got {value!r}") from err


def ints(value: Any) -> list[int]:
    """Comma-separated integers; accepts 1e3-style values that are whole."""
    numbers = floats(value)
    if any(v != int(v) for v in numbers):
        raise vol.Invalid(f"expected whole numbers, got {value!r}")
    return [int(v) for v in numbers]


def names(value: Any) -> list[str]:
    return _split(value)


def delta_grid(value: Any) -> DeltaGrid:
    if isinstance(value, DeltaGrid):
        return value
    try:
        return DeltaGrid.parse(str(value))
    except ValueError as err:
        raise vol.Invalid(str(err)) from err


def mode_spec(value: Any) -> ModeSpec:
    """'gaussian, mean, sigma, count' or 'uniform, lo, hi, count'."""
    if isinstance(value, ModeSpec):
        return value
    parts = _split(value)
    if len(parts) != 4:
        raise vol.Invalid(f"mode needs 'distribution, a, b, count', got {value!r}")
    try:
        return ModeSpec(parts[0], float(parts[1]), float(parts[2]), int(float(parts[3])))
    except ValueError as err:
        raise vol.Invalid(f"invalid mode {value!r}: {err}") from err


def seed(value: Any) -> int:
    number = int(value)
    if not 0 <= number < 1 << 64:
        raise vol.Invalid("seed must be a 64-bit unsigned integer")
    return number


Positive = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))
Probability = vol.All(vol.Coerce(float), vol.Range(min=0, max=1, min_included=False, max_included=False))
Fraction = vol.All(vol.Coerce(float), vol.Range(min=0, max=1))
Count = vol.All(vol.Coerce(int), vol.Range(min=1))

EXPERIMENT_SCHEMA = vol.Schema({
    vol.Required(CONF_KIND): vol.In(EXPERIMENT_KINDS + TOOL_KINDS),
    vol.Optional(CONF_OUTPUT, default="out"): str,
    vol.Required(CONF_SEED): seed,
    vol.Optional(CONF_STREAM, default=0): vol.All(vol.Coerce(int), vol.Range(min=0)),
    vol.Optional(CONF_QUICK, default=False): vol.Boolean(),
    vol.Optional(CONF_WORKERS, default=1): Count,
})

DATA_SCHEMA = vol.Schema({
    vol.Optional("source", default=SOURCE_GAUSSIAN): vol.In([SOURCE_GAUSSIAN, SOURCE_LANES, SOURCE_CSV]),
    vol.Optional("path"): vol.IsFile(),
    vol.Optional("test_path"): vol.IsFile(),
    vol.Optional("n_train"): vol.All(vol.Coerce(int), vol.Range(min=3)),
    vol.Optional("n_test"): Count,
    vol.Optional("noise", default="none, uniform, symmetric_nonuniform"):
        vol.All(names, [vol.Coerce(NoiseKind)]),
    vol.Optional("noise_frac", default=NOISE_FRACTION): Fraction,
    vol.Optional("mean", default="0, 0"): vol.All(floats, vol.Length(min=1)),
    vol.Optional("cov", default="1, 0, 0, 1"): vol.All(floats, vol.Length(min=1)),
    vol.Optional("sizes", default=SCALING_SIZES): vol.All(ints, vol.Length(min=3), [vol.Range(min=3)]),
    vol.Optional("p_swerve", default=0.05): Fraction,
    vol.Optional("sample_rate", default=10.0): Positive,
    vol.Optional("chunk_size", default=1 << 20): Count,
})

MODEL_SCHEMA = vol.Schema({
    vol.Optional("k", default="1, 2, 3, 4"): vol.All(ints, vol.Length(min=1), [vol.Range(min=1)]),
    vol.Optional("grid", default="default"): delta_grid,
    vol.Optional("window", default=REPLAN_HORIZON): Positive,
    vol.Optional("split", default=STATE_SECONDS): Positive,
    vol.Optional("eta", default=ETA): Positive,
    vol.Optional("delta_rule", default="monotone"): vol.In(["monotone", "raw"]),
    vol.Optional("beta", default=SCENARIO_BETA): Probability,
    vol.Optional("mc_samples", default=MC_SAMPLES): Count,
    vol.Optional("region", default="per_step"): vol.In(["per_step", "joint"]),
    vol.Optional("em_tol", default=EM_TOL): Positive,
    vol.Optional("em_max_iter", default=EM_MAX_ITER): Count,
    vol.Optional("em_restarts", default=EM_RESTARTS): Count,
    vol.Optional("cov_floor", default=EM_COV_FLOOR): Positive,
    vol.Optional("condition_on_mode", default=False): vol.Boolean(),
    vol.Optional("horizons", default=HORIZONS): vol.All(floats, vol.Length(min=1), [Positive]),
    vol.Optional("delta_targets", default="1e-8"): vol.All(floats, vol.Length(min=1), [Probability]),
    vol.Optional("km_per_trajectory", default=KM_PER_TRAJECTORY): Positive,
    vol.Optional("vcdim", default=5): Count,
})

SCHEMA_SCHEMA = vol.Schema({
    vol.Optional("layout", default=LAYOUT_LONG): vol.In([LAYOUT_LONG, LAYOUT_WIDE]),
    vol.Optional("track", default="track_id"): str,
    vol.Optional("frame", default="frame"): str,
    vol.Optional("x", default="x"): str,
    vol.Optional("y", default="y"): str,
    vol.Optional("lane", default="lane"): str,
    vol.Optional("features", default=""): names,
    vol.Optional("sentinel", default=CONTEXT_SENTINEL): vol.Coerce(float),
    vol.Optional("sample_rate", default=25.0): Positive,
    vol.Optional("segment_seconds", default=SCENARIO_DURATION): Positive,
    vol.Optional("test_fraction", default=0.2): Probability,
})

PRUNING_SCHEMA = vol.Schema({
    vol.Optional("enabled", default=False): vol.Boolean(),
    vol.Optional("epsilon_traj", default=EPSILON_TRAJ): Positive,
    vol.Optional("epsilon_env", default=EPSILON_ENV): Positive,
    vol.Optional("prefix_seconds", default=STATE_SECONDS): Positive,
})

MODES_SCHEMA = vol.Schema({
    vol.Optional("sets", default="gaussian, uniform"): vol.All(names, vol.Length(min=1)),
    vol.Optional("gaussian.mode1", default="gaussian, -1, 0.5, 1000"): mode_spec,
    vol.Optional("gaussian.mode2", default="gaussian, 1, 0.5, 1000"): mode_spec,
    vol.Optional("uniform.mode1", default="uniform, -2, 1, 1000"): mode_spec,
    vol.Optional("uniform.mode2", default="uniform, -1, 2, 1000"): mode_spec,
    vol.Optional("delta", default=1e-8): Probability,
    vol.Optional("lo", default=-2.0): vol.Coerce(float),
    vol.Optional("hi", default=2.0): vol.Coerce(float),
    vol.Optional("grid", default=10 * MIN_INTERVAL_GRID): vol.All(vol.Coerce(int), vol.Range(min=MIN_INTERVAL_GRID)),
}, extra=vol.ALLOW_EXTRA)

EXPORT_SCHEMA = vol.Schema({
    vol.Optional("levels", default="0, 1, 2, 3, 4, 5"): vol.All(floats, vol.Length(min=1), [vol.Range(min=0)]),
    vol.Optional("mode_label"): vol.Coerce(int),
})

SECTION_SCHEMAS = {
    SECTION_EXPERIMENT: EXPERIMENT_SCHEMA,
    SECTION_DATA: DATA_SCHEMA,
    SECTION_MODEL: MODEL_SCHEMA,
    SECTION_SCHEMA: SCHEMA_SCHEMA,
    SECTION_PRUNING: PRUNING_SCHEMA,
    SECTION_MODES: MODES_SCHEMA,
    SECTION_EXPORT: EXPORT_SCHEMA,
}


@dataclass(frozen=True)
class IngestSchema:
    """Column map and sampling of a scenario CSV."""

    layout: str = LAYOUT_LONG
    track: str = "track_id"
    frame: str = "frame"
    x: str = "x"
    y: str = "y"
    lane: str | None = "lane"
    features: tuple[str, ...] = ()
    sentinel: float = CONTEXT_SENTINEL
    sample_rate: float = 25.0
    segment_seconds: float = SCENARIO_DURATION
    test_fraction: float = 0.2

    def __post_init__(self) -> None:
        """Validate the sampling."""
        if self.sample_rate <= 0:
            raise ConfigError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "features", tuple(self.features))
        if self.lane == "":
            object.__setattr__(self, "lane", None)

    def wide_columns(self, samples: int) -> list[str]:
        """Coordinate columns of the wide layout, x_0..x_n then y_0..y_n."""
        return ([f"{self.x}_{i}" for i in range(samples)]
                + [f"{self.y}_{i}" for i in range(samples)])


@dataclass(frozen=True)
class ModeSet:
    """A labelled pair of modes for the two-mode recipe."""

    name: str
    mode1: ModeSpec
    mode2: ModeSpec


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment configuration."""

    kind: str
    output: Path
    rng: RngSpec
    quick: bool
    workers: int
    data: dict[str, Any]
    model: dict[str, Any]
    schema: IngestSchema
    pruning: PruningConfig | None
    mode_sets: tuple[ModeSet, ...]
    modes: dict[str, Any]
    export: dict[str, Any]

    @property
    def grid(self) -> DeltaGrid:
        return self.model["grid"]

    @property
    def em(self) -> EmConfig:
        return EmConfig(self.model["em_tol"], self.model["em_max_iter"], self.model["em_restarts"],
                        self.model["cov_floor"], self.workers)

    def noise_specs(self) -> list[NoiseSpec]:
        return [NoiseSpec(kind, self.data["noise_frac"]) for kind in self.data["noise"]]

    def canonical(self) -> dict[str, Any]:
        """Configuration as plain JSON values; workers excluded since results do not depend on it."""
        def plain(value: Any) -> Any:
            if isinstance(value, DeltaGrid):
                return list(value.deltas)
            if isinstance(value, ModeSpec):
                return [value.distribution, value.a, value.b, value.count]
            if isinstance(value, NoiseKind):
                return value.value
            if isinstance(value, (list, tuple)):
                return [plain(v) for v in value]
            if isinstance(value, dict):
                return {str(k): plain(v) for k, v in value.items()}
            if isinstance(value, Path):
                return str(value)
            return value

        return {
            "kind": self.kind,
            "quick": self.quick,
            "rng": self.rng.to_dict(),
            "data": plain(self.data),
            "model": plain(self.model),
            "schema": plain(asdict(self.schema)),
            "pruning": plain(asdict(self.pruning)) if self.pruning else None,
            "modes": plain(self.modes),
            "export": plain(self.export),
        }

    def digest(self) -> str:
        """sha256 of the canonical configuration."""
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _validate(section: str, raw: dict[str, Any]) -> dict[str, Any]:
    try:
        return SECTION_SCHEMAS[section](raw)
    except vol.Invalid as err:
        _LOGGER.error("Invalid [%s] section: %s", section, err)
        raise ConfigError(f"[{section}] {err}") from err


def read_sections(path: Path | str | None) -> dict[str, dict[str, str]]:
    """Raw key/value pairs per section of an INI file."""
    if path is None:
        return {}
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    except configparser.Error as err:
        raise ConfigError(f"cannot parse config {path}: {err}") from err
    unknown = [s for s in parser.sections() if s not in SECTION_SCHEMAS]
    if unknown:
        raise ConfigError(f"unknown config sections: {', '.join(unknown)}")
    return {section: dict(parser.items(section)) for section in parser.sections()}


def build_config(sections: dict[str, dict[str, Any]],
                 overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    """Validate raw sections, after applying command-line overrides to [experiment]."""
    raw = {name: dict(values) for name, values in sections.items()}
    experiment_raw = raw.setdefault(SECTION_EXPERIMENT, {})
    for key, value in (overrides or {}).items():
        if value is not None:
            experiment_raw[key] = value

    validated = {name: _validate(name, raw.get(name, {})) for name in SECTION_SCHEMAS}
    experiment = validated[SECTION_EXPERIMENT]
    schema_raw = validated[SECTION_SCHEMA]
    data = validated[SECTION_DATA]
    if data["source"] == SOURCE_CSV and "path" not in data:
        raise ConfigError("[data] source = csv needs a path")

    modes = validated[SECTION_MODES]
    mode_sets = []
    for name in modes["sets"]:
        try:
            mode_sets.append(ModeSet(name, mode_spec(modes[f"{name}.mode1"]),
                                     mode_spec(modes[f"{name}.mode2"])))
        except KeyError as err:
            raise ConfigError(f"[modes] set {name!r} lacks {err}") from err
        except vol.Invalid as err:
            raise ConfigError(f"[modes] {err}") from err
    if not modes["lo"] < modes["hi"]:
        raise ConfigError("[modes] needs lo < hi")

    pruning = validated[SECTION_PRUNING]
    config = ExperimentConfig(
        kind=experiment[CONF_KIND],
        output=Path(experiment[CONF_OUTPUT]),
        rng=RngSpec(experiment[CONF_SEED], experiment[CONF_STREAM]),
        quick=experiment[CONF_QUICK],
        workers=experiment[CONF_WORKERS],
        data=data,
        model=validated[SECTION_MODEL],
        schema=IngestSchema(**{**schema_raw, "features": tuple(schema_raw["features"])}),
        pruning=PruningConfig(pruning["epsilon_traj"], pruning["epsilon_env"], pruning["prefix_seconds"])
        if pruning["enabled"] else None,
        mode_sets=tuple(mode_sets),
        modes={k: modes[k] for k in ("delta", "lo", "hi", "grid")},
        export=validated[SECTION_EXPORT],
    )
    _LOGGER.debug("Loaded %s config, seed %d, output %s", config.kind, config.rng.seed, config.output)
    return config


def load_config(path: Path | str | None, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    """Read, override and validate an experiment config file."""
    return build_config(read_sections(path), overrides)
