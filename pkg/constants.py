"""Numeric defaults, caps and tolerances shared by every module."""

# --- Size caps ---
TABLE_ORDER_CAP: int = 2 ** 16  # dense multiplication tables
DENSE_ORDER_CAP: int = 4096  # dense regular-representation matrices
CAYLEY_VERTEX_CAP: int = 100_000  # BFS closure of congruence quotients
DENSE_SPECTRUM_VERTICES: int = 1024  # below this, graph spectra use dense eigh

# --- Group table validation ---
EXHAUSTIVE_ASSOCIATIVITY_ORDER: int = 512
RANDOM_ASSOCIATIVITY_TRIPLES: int = 100_000

# --- Tolerances ---
IDEMPOTENT_TOL: float = 1e-10
ZERO_SINGULAR_TOL: float = 1e-10
SPECTRUM_CLAMP_TOL: float = 1e-10
LEMMA_MATCH_TOL: float = 1e-9
ITERATION_TOL: float = 1e-10
BOUND_SLACK: float = 1e-8
EIGSH_TOL: float = 1e-8
EIGSH_MAX_ITER: int = 10_000

# --- Randomised estimators ---
POWER_ITERATION_RESTARTS: int = 16
POWER_ITERATION_STEPS: int = 200
RATIO_SEARCH_RESTARTS: int = 64
POINCARE_RESTARTS: int = 32
POINCARE_DIMENSION: int = 3
POINCARE_STEPS: int = 200

# --- Runtime ---
DEFAULT_SEED: int = 0
FLOAT_SIGNIFICANT_DIGITS: int = 17
THREADS_ENV_VAR: str = "ROBUST_T_THREADS"

# --- Criterion defaults ---
DEFAULT_R_GRID: tuple[float, ...] = (2.0, 3.0, 4.0)
DEFAULT_P1_GRID: tuple[float, ...] = (1.5, 2.0)
DEFAULT_P2_GRID: tuple[float, ...] = (2.0, 3.0, 4.0)
DEFAULT_POINCARE_P: tuple[float, ...] = (1.5, 2.0, 3.0)
