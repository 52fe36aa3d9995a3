"""Constants configuration for dephasim."""

from typing import Final
from typing import Tuple


# Validation tolerances
NORMALIZATION_TOLERANCE: Final[float] = 1e-12
MAGNITUDE_TOLERANCE: Final[float] = 1e-12
REDUCED_DENSITY_TOLERANCE: Final[float] = 1e-9

# Closed-form evaluation
LARGE_N_THRESHOLD: Final[int] = 10_000
MODE_CHUNK_SIZE: Final[int] = 4096

# Fock oracle
ORACLE_TOLERANCE: Final[float] = 1e-8
GIBBS_TAIL_THRESHOLD: Final[float] = 1e-14
COHERENT_TAIL_BUDGET: Final[float] = 1e-14
TAIL_WINDOW: Final[int] = 5
TRUNCATION_TARGET: Final[float] = 1e-10
DEFAULT_N_MAX_CEILING: Final[int] = 4096
DEFAULT_ORACLE_MODE_BOUND: Final[int] = 16
UNITARITY_TOLERANCE: Final[float] = 1e-10

# Gaussian fit
FIT_MIN_POINTS: Final[int] = 5
FIT_MAGNITUDE_FLOOR: Final[float] = 1e-12
FIT_GRID_POINTS: Final[int] = 64
# independent ensembles averaged per point of an n_modes sweep
SWEEP_REPLICAS: Final[int] = 8

# Ensemble defaults
DEFAULT_OMEGA0_RANGE: Final[Tuple[float, float]] = (0.5, 1.5)
DEFAULT_OMEGA_RANGE: Final[Tuple[float, float]] = (0.05, 0.3)
DEFAULT_BIG_OMEGA_RANGE: Final[Tuple[float, float]] = (0.8, 1.2)
DEFAULT_LAMBDA_RADIUS: Final[float] = 1.0
DEFAULT_SEED: Final[int] = 0

# Limit checks
LIMIT_SCALE_EXPONENTS: Final[Tuple[int, ...]] = (1, 2, 3, 4)
LOW_TEMPERATURE_DIVISOR: Final[float] = 50.0
LOW_TEMPERATURE_TOLERANCE: Final[float] = 1e-8

# CLI
CSV_FLOAT_FORMAT: Final[str] = "{:.16e}"
THREADS_ENV_VAR: Final[str] = "DEPHASIM_THREADS"
METRICS_FILE_ENV_VAR: Final[str] = "DEPHASIM_METRICS_FILE"

EXIT_OK: Final[int] = 0
EXIT_SCHEMA: Final[int] = 2
EXIT_COMPUTE: Final[int] = 3
EXIT_ADJUDICATION: Final[int] = 4
EXIT_LIMIT: Final[int] = 5

# Error Messages
ERROR_NOT_NORMALIZED: Final[str] = (
    "{field} is not normalized: |a|^2 + |b|^2 = {norm:.17g} (tolerance {tol:g})."
)
ERROR_DEGENERATE_MODE: Final[str] = (
    "Mode {index} is degenerate: big_omega = 0 with omega = {omega:g} != 0."
)
ERROR_WRONG_PREPARATION: Final[str] = (
    "Method {method} requires a {expected} preparation, got {received}."
)
ERROR_TRUNCATION_CEILING: Final[str] = (
    "Truncation did not converge for mode {index}: n_max {n_max} exceeds the ceiling {ceiling}."
)
