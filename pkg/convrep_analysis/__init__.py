"""
Convex Representation Analysis
==============================

Numerical toolkit for convex representations of maximal monotone operators:
Fenchel conjugates and the J-transform on grids, Fitzpatrick and sigma_T
functions, fixed-point residuals and the eps-enlargement calculus.

Main modules:
- core: grid computations and property checks
- core.services: experiment suites and seeded sampling
- cli: command-line front end
"""

__version__ = "1.0.0"

from .core import *  # noqa: F401,F403
from .core import __all__ as _core_all

__all__ = list(_core_all)
