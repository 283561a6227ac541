import os

# -----------------------------------------------------------------------------
# Exact Arithmetic Limits
# -----------------------------------------------------------------------------
# Sign enumeration visits 2^(n-1) classes; beyond this n the caller must opt in
ENUMERATION_CAP = int(os.getenv("L1B_ENUMERATION_CAP", "24"))
# Rational entries grow fast under elimination
INVERSION_CAP = int(os.getenv("L1B_INVERSION_CAP", "64"))

# -----------------------------------------------------------------------------
# Rendering / Certified Bounds
# -----------------------------------------------------------------------------
DISPLAY_PRECISION = int(os.getenv("L1B_PRECISION", "12"))       # significant digits
CERTIFIED_DIGITS = int(os.getenv("L1B_CERTIFIED_DIGITS", "40"))  # radical bounds

# -----------------------------------------------------------------------------
# Randomized Suites
# -----------------------------------------------------------------------------
DEFAULT_SEED = int(os.getenv("L1B_SEED", "0"))
WORKERS = int(os.getenv("L1B_WORKERS", "1"))

# dense draws: numerators in [-GRID_NUMERATOR, GRID_NUMERATOR], denominators in [1, GRID_DENOMINATOR]
GRID_NUMERATOR = 6
GRID_DENOMINATOR = 4
# grid mode (vertex oracle suite)
GRID_VALUES = ("-1", "-1/2", "0", "1/2", "1")
NEAR_STANDARD_RADIUS = "1/4"
SINGULAR_RETRIES = 100

# -----------------------------------------------------------------------------
# Basis File
# -----------------------------------------------------------------------------
FORMAT_NAME = "l1-basis"
FORMAT_VERSION = 1

# Default verify ranges (CLI flags override)
DEFAULT_TRIALS = 200
DEFAULT_N_RANGE = "3..12"
INTERPOLATION_EXPONENTS = ("3/2", "2", "3", "5")
BRUTE_FORCE_LIMIT = 8   # O(n!) permutation oracle

# -----------------------------------------------------------------------------
# Reports
# -----------------------------------------------------------------------------
APP_NAME = "l1_basis"
VERSION = "1.0.0"
REPORT_VERSION = 1
