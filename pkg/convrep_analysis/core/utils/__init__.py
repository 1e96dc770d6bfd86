"""
Utils module for convex representation experiments
Configuration constants, extended-real helpers, convex hulls and artifact I/O
"""

from .config import *
from .extreal import format_extreal, parse_extreal, ge_with_inf, common_finite
from .hull import in_convex_hull
from .io import save_json, load_json, save_jsonl, load_jsonl, save_function_csv, load_function_values

__all__ = [
    # Configuration
    'OUTPUTS_DIR', 'DEFAULT_OUTPUT_DIR', 'OUTPUT_DIR_ENV', 'DEFAULT_SEED',
    'DEFAULT_EQ_TOL', 'DEFAULT_SNAP_TOL',

    # Extended reals
    'format_extreal', 'parse_extreal', 'ge_with_inf', 'common_finite',

    # Geometry
    'in_convex_hull',

    # I/O
    'save_json', 'load_json', 'save_jsonl', 'load_jsonl', 'save_function_csv', 'load_function_values',
]
