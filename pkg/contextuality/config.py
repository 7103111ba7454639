"""
Configuration for the contextuality toolkit
"""
from fractions import Fraction

# Tolerances
PROBABILITY_TOLERANCE = 1e-9  # per-context normalization, strict mode
LP_FEASIBILITY_TOLERANCE = 1e-9
DUALITY_GAP_TOLERANCE = 1e-8
REPORT_MARGIN = 1e-6  # CF must exceed eta by this much to certify

# Dense incidence matrix guard: n * m entries
INCIDENCE_SIZE_CAP = 10 ** 6

# LP backends: "float" (scipy HiGHS) or "exact" (rational simplex)
DEFAULT_BACKEND = "float"
EXACT_MAX_PIVOTS = 50_000

# Documents
SIGNIFICANT_DIGITS = 12
DOCUMENT_INDENT = 2

# Batch mode
MAX_WORKERS = 4

# Pell convergent 1607521/1136689, |error| < 3e-13
SQRT2_RATIONAL = Fraction(1607521, 1136689)
