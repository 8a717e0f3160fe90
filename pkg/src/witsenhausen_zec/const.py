from __future__ import annotations

import math

# Quadrature
DEFAULT_REL_TOL = 1e-8
DEFAULT_ABS_TOL = 1e-10
DEFAULT_MAX_SUBDIVISIONS = 200
DEFAULT_HERMITE_NODES = 64
DEFAULT_MAX_DOUBLINGS = 4
MIN_NODE_COUNT = 8

# Full-line integrals are truncated at means +/- this many standard deviations
WINDOW_SIGMAS = 10.0
DENSITY_FLOOR = 1e-300

# ZEC / Non-ZEC search
DEFAULT_ZEC_GRID = 256
MIN_ZEC_GRID = 16
DEFAULT_GAMMA_GRID = 26
DEFAULT_A_GRID = 128
DEFAULT_REFINE_TOL = 1e-4
ROOT_XTOL = 1e-8
GAMMA_MAX = 0.5
DEFAULT_REGION_GAMMAS = (0.0, 0.05, 0.1, 0.5)

DEFAULT_TOL_P = 1e-4
PSTAR_SEARCH_CAP = 64.0

# Boundary designs (slack == 0 within this many bits) are admissible
ADMISSIBLE_SLACK_TOL = 1e-9
# V1 >= 0 is checked with this much rounding slack
V1_TOL = 1e-10
# cost_F clamps quadrature noise into [0, a^2]; larger excursions are logged
CLAMP_WARN_TOL = 1e-6

# Monte-Carlo
DEFAULT_MC_SAMPLES = 10_000_000
DEFAULT_MC_ENTROPY_SAMPLES = 1_000_000
DEFAULT_MC_BATCH = 1_000_000
DEFAULT_MC_SEED = 20240101
MIN_MC_SAMPLES = 10_000
DEFAULT_BANDS = 3.0

# Frontier
ENVELOPE_TOL = 1e-9
CSV_FORMAT = ".17g"

# Retries
DEFAULT_ATTEMPTS = 2
# Sweeps should finish well inside this or something is stuck
SWEEP_SAFETY_TIMEOUT = 3600.0

THREADS_ENV = "WITSENHAUSEN_ZEC_THREADS"

LOG2_E = 1.0 / math.log(2.0)
TWO_PI_E = 2.0 * math.pi * math.e

NON_CONVERGENCE_ADVICE = "Increase max_doublings/max_subdivisions or loosen rel_tol"
NO_UPPER_BOUND_ADVICE = (
    "The information constraint cannot be met at any tested power; "
    "check that N is not pathologically large compared to Q"
)
