"""
Configuration file for convex representation experiments
"""

# Output storage paths
OUTPUTS_DIR = 'outputs'
DEFAULT_OUTPUT_DIR = f'{OUTPUTS_DIR}/experiments'
OUTPUT_DIR_ENV = 'CONVREP_OUTPUT_DIR'
SEED_ENV = 'CONVREP_SEED'
LOG_LEVEL_ENV = 'CONVREP_LOG_LEVEL'

# Grid settings
SUPPORTED_DIMENSIONS = (1, 2)
MIN_AXIS_POINTS = 2
DEFAULT_SNAP_TOL = 1e-9   # graph points must land on grid nodes

# Tolerances
DEFAULT_EQ_TOL = 1e-6        # |h - pi| <= eq_tol counts as equality
MINORANT_TOL = 1e-9          # h - pi >= -MINORANT_TOL
MIDPOINT_TOL = 1e-9          # midpoint convexity slack on sampled functions
CONVEXITY_TOL = 1e-12        # fast conjugate convexity precheck
PLATEAU_TOL = 1e-9          # chord slopes this close to s trigger a full scan
MEMBERSHIP_SLACK = 1e-9      # slack for enlargement sublevel queries
HA_TOL = 1e-9                # h >= Jh - HA_TOL
HULL_TOL = 1e-9              # convex hull membership of clconv domains
WEIGHT_TOL = 1e-12           # p + q = 1 in the transportation formula

# Heuristic fixed point search
DEFAULT_MAX_ITERS = 20
DEFAULT_STOP_TOL = 1e-6

# Randomized audits
DEFAULT_SEED = 0
DEFAULT_AUDIT_SAMPLES = 10_000
AUDIT_CHUNK_ROWS = 512
AUDIT_THRESHOLD = -1e-12     # worst pairwise margin still counted as a pass

# Work arrays: upper bound on elements materialized per broadcast chunk
CHUNK_ELEMENTS = 4_000_000

# Serialization
CSV_FLOAT_FORMAT = '%.17g'
INF_LITERAL = 'inf'
NEG_INF_LITERAL = '-inf'
JSON_INDENT = 2
