# =============================================================================
# GLOBAL CONSTANTS
# Numeric defaults, heuristic disclaimer and forbidden claim phrases
# =============================================================================

# =============================================================================
# HEURISTIC DISCLAIMER (Must appear in every verdict-bearing report)
# =============================================================================

HEURISTIC_LABEL = (
    "heuristic: finite-orbit numerical evidence only, not a proof of ergodicity "
    "or irreducibility"
)

ULAM_LABEL = (
    "grid-scale invariant-set detection only; an empty support is not evidence "
    "of ergodicity"
)


# =============================================================================
# NUMERIC DEFAULTS
# =============================================================================

# Ergodicity scan thresholds
A_LO = 0.05
D_LO = 0.05
A_HI = 0.5
D_HI = 0.3
RHO = 1e-9

DEFAULT_N = 1_000_000
DEFAULT_STARTS = 16
MIN_STARTS = 8

# Caps
PRODUCT_CAP = 10_000_000
RETURN_CAP = 1_000_000

# Chart singularities
POLE_THRESHOLD = 1e-14
IOTA_ANNULUS = 1e-12

# Sections
SECTION_RESIDUAL_TOL = 1e-9
EXACT_INVARIANCE_TOL = 1e-12

# Orbit blocks for vectorized iteration
BLOCK_LENGTH = 4096

# Longest product folded in exact Fraction arithmetic by default
EXACT_PRODUCT_LENGTH = 4096

# Bits of a Bernoulli sequence read into its binary coordinate
BINARY_COORDINATE_BITS = 24

# Default observable bank ranges
BANK_MAX_FREQUENCY = 5
BANK_MAX_COSINE = 6

REPORT_SCHEMA_VERSION = "1.2"


# =============================================================================
# FORBIDDEN CLAIMS (Never appear in any report)
# =============================================================================

FORBIDDEN_CLAIMS = frozenset([
    '"verdict": "ergodic"',
    '"ergodic"',
    "is ergodic",
    "proves ergodicity",
    "proof of irreducibility",
    "proved irreducible",
    "is irreducible",
])
