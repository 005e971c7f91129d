"""Constants for the tailcal experiment harness."""

DOMAIN = "tailcal"

# Experiment kinds
GAUSSIAN_AUDIT = "gaussian_audit"
GMM_AUDIT = "gmm_audit"
QUANTILE_AUDIT = "quantile_audit"
QUANTILE_SCALING = "quantile_scaling"
SCENARIO_OPT = "scenario_opt"
HMM_INTERVALS = "hmm_intervals"
INGEST_AUDIT = "ingest_audit"

EXPERIMENT_KINDS = [
    GAUSSIAN_AUDIT,
    GMM_AUDIT,
    QUANTILE_AUDIT,
    QUANTILE_SCALING,
    SCENARIO_OPT,
    HMM_INTERVALS,
    INGEST_AUDIT,
]

# Subcommands that are not experiments
INGEST = "ingest"
EXPORT_TUBE = "export_tube"
TOOL_KINDS = [INGEST, EXPORT_TUBE]

# Config sections
SECTION_EXPERIMENT = "experiment"
SECTION_DATA = "data"
SECTION_MODEL = "model"
SECTION_SCHEMA = "schema"
SECTION_PRUNING = "pruning"
SECTION_MODES = "modes"
SECTION_EXPORT = "export"

# Data sources
SOURCE_GAUSSIAN = "gaussian"
SOURCE_LANES = "lanes"
SOURCE_CSV = "csv"

# Context features of the synthetic lane generator
LANE_FEATURES = ("speed", "lead_gap", "lead_speed")

# Ingestion layouts
LAYOUT_LONG = "long"
LAYOUT_WIDE = "wide"

# Sizes
FULL_TRAIN = 10_000
FULL_TEST = 10_000_000
QUICK_TEST = 100_000
QUICK_TRAIN_CAP = 100_000
SCALING_SIZES = [1_000, 3_162, 10_000, 31_623, 100_000, 316_228, 1_000_000]
QUICK_SCALING_SIZES = [1_000, 3_162, 10_000, 31_623, 100_000]
LANE_TRAIN = 40_000
LANE_TEST = 100_000
QUICK_LANE_TRAIN = 4_000
QUICK_LANE_TEST = 10_000

# Scenario hull horizons in seconds
HORIZONS = [2.0, 4.0, 6.0]

# Experiment streams, one RngSpec stream id per role
STREAM_TRAIN = 1
STREAM_TEST = 2
STREAM_MODEL = 3

# Output files
MANIFEST_FILE = "manifest.json"
SUMMARY_FILE = "summary.json"
SCALING_FILE = "scaling.csv"
INTERVALS_FILE = "intervals.csv"
HORIZONS_FILE = "horizons.csv"
TUBE_FILE = "tube.csv"
SCENARIOS_FILE = "scenarios.csv"
POSTERIOR_FILE = "posterior.csv"
INGEST_REPORT_FILE = "ingest_report.json"

VIOLATION_CONVENTION = "per-trajectory, first replanning window only"
