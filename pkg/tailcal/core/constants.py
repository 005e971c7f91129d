"""Numerical defaults for the tailcal core library."""

# Scenario geometry
SCENARIO_DURATION = 10.0
STATE_SECONDS = 2.0
REPLAN_HORIZON = 2.0
GRID_TOLERANCE = 1e-9

# Equivalent-scenario pruning (2 ft in meters)
EPSILON_TRAJ = 0.6096
EPSILON_ENV = 2.0

# Gaussian mixture EM
EM_TOL = 1e-8
EM_MAX_ITER = 500
EM_RESTARTS = 10
EM_COV_FLOOR = 1e-8
WEIGHT_SUM_TOL = 1e-12

# Highest-density region threshold
MC_SAMPLES = 1_000_000
MC_MIN_SAMPLES = 10_000
MC_MIN_TAIL = 10

# Scenario approach
SCENARIO_BETA = 1e-6
BISECTION_TOL = 1e-12

# Calibration
ETA = 0.5
DELTA_GRID_EXPONENTS = range(2, 17)
SHARD_SIZE = 1 << 16

# Two-mode decision intervals
INTERVAL_TOL = 1e-9
MIN_INTERVAL_GRID = 1000

# Synthetic lane scenarios
LANE_WIDTH = 3.5
LANE_CHANGE_SECONDS = 3.0
LANE_JITTER_SIGMA = 0.1
LANE_SPEED_MEAN = 30.0
LANE_SPEED_SIGMA = 1.5
LANE_INITIAL = 1
LANE_SWERVE_WINDOW = (2.0, 7.0)
LANE_LEAD_PROBABILITY = 0.5
CONTEXT_SENTINEL = -1.0

# Additive noise on synthetic Gaussian data
NOISE_FRACTION = 0.3
NONUNIFORM_BETA = (0.5, 2.0)
