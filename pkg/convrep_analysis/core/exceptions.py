"""
Error hierarchy for convex representation computations
"""

from typing import Any, List, Optional


class ConvRepError(ValueError):
    """Base class for every validation error raised by the toolkit"""

    exit_code = 1


class DimensionMismatchError(ConvRepError):
    """Two points, grids or functions live in different dimensions"""


class GridError(ConvRepError):
    """Invalid axis, mismatched grids or a point that is not a grid node"""


class GraphOffGridError(ConvRepError):
    """Operator graph points do not land on grid nodes"""

    def __init__(self, message: str = "graph off grid", off_grid: int = 0):
        super().__init__(message)
        self.off_grid = off_grid


class ImproperFunctionError(ConvRepError):
    """Function is +inf everywhere"""

    def __init__(self, message: str = "improper function"):
        super().__init__(message)


class NonConvexSamplesError(ConvRepError):
    """Samples fail the midpoint convexity precheck of the fast conjugate"""

    def __init__(self, message: str = "fast path requires convex samples", index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class NonMonotoneError(ConvRepError):
    """Operator graph contains pairs with negative monotonicity product"""

    def __init__(self, violations: List[Any]):
        worst = min(violations, key=lambda v: v.value) if violations else None
        message = f"graph is not monotone: {len(violations)} violating pair(s)"
        if worst is not None:
            message += f", worst {worst.value:.6g} at pair ({worst.i}, {worst.j})"
        super().__init__(message)
        self.violations = violations


class InvalidParameterError(ConvRepError):
    """Scalar parameter out of range (eps < 0, invalid weights, ...)"""


class SpecValidationError(ConvRepError):
    """Malformed experiment input; names the offending field"""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class PropertyViolationError(ConvRepError):
    """A checked mathematical property failed on a concrete instance"""

    exit_code = 2

    def __init__(self, message: str, iteration: Optional[int] = None, report: Any = None):
        super().__init__(message)
        self.iteration = iteration
        self.report = report
