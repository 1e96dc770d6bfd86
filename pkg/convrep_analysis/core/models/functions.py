"""
闭式凸函数 - 下半连续的真测试函数，
带有精确的函数值、共轭与次微分图
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Tuple

import numpy as np

from ..exceptions import GridError, InvalidParameterError, SpecValidationError
from ..utils.config import DEFAULT_SNAP_TOL
from .grid import Grid, GridFunction


class FunctionKind(Enum):
    """闭式函数各变体的 JSON 标签"""
    QUADRATIC = "quadratic"
    ABS = "abs"
    INDICATOR_POINT = "indicator_point"
    SAMPLES = "samples"
    SEPARABLE = "separable"


def _as_column(x) -> np.ndarray:
    """Coerce scalar / vector input to a flat float array of 1-D points"""
    return np.asarray(x, dtype=np.float64).reshape(-1)


class ClosedFormConvexFunction(ABC):
    """闭式函数变体的基类（除可分离和外均为一维）"""

    kind: FunctionKind
    dim: int = 1

    @abstractmethod
    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Values at 1-D points x (shape (N,)) or d-D points (shape (N, d))"""

    @abstractmethod
    def conjugate(self, s: np.ndarray) -> np.ndarray:
        """Closed-form Fenchel conjugate at dual points"""

    @abstractmethod
    def subgradient_pairs(self, xgrid: Grid, sgrid: Grid) -> List[Tuple[np.ndarray, np.ndarray]]:
        """Sampled graph of the subdifferential, as (x, x*) pairs"""

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        pass

    def sample(self, grid: Grid) -> GridFunction:
        pts = grid.points()
        x = pts[:, 0] if self.dim == 1 else pts
        if grid.dim != self.dim:
            raise GridError(f"{self.kind.value} is {self.dim}-D, grid is {grid.dim}-D")
        return GridFunction(grid, self.evaluate(x))

    @classmethod
    def from_dict(cls, data: Dict[str, Any], field_name: str = 'f') -> 'ClosedFormConvexFunction':
        if not isinstance(data, dict) or 'kind' not in data:
            raise SpecValidationError(f"{field_name}.kind", "missing")
        try:
            kind = FunctionKind(data['kind'])
        except ValueError as e:
            valid = ', '.join(k.value for k in FunctionKind)
            raise SpecValidationError(f"{field_name}.kind", f"unknown kind {data['kind']!r} (valid: {valid})") from e

        try:
            if kind is FunctionKind.QUADRATIC:
                return Quadratic(a=float(data.get('a', 1.0)), b=float(data.get('b', 0.0)), c=float(data.get('c', 0.0)))
            if kind is FunctionKind.ABS:
                return AbsValue()
            if kind is FunctionKind.INDICATOR_POINT:
                return IndicatorPoint(x0=float(data.get('x0', 0.0)))
            if kind is FunctionKind.SAMPLES:
                return GridSamples(GridFunction.from_dict(data, f"{field_name}"))
            terms = data.get('terms')
            if not isinstance(terms, list) or len(terms) != 2:
                raise SpecValidationError(f"{field_name}.terms", "separable functions need two 1-D terms")
            return SeparableSum(tuple(cls.from_dict(t, f"{field_name}.terms[{i}]") for i, t in enumerate(terms)))
        except InvalidParameterError as e:
            raise SpecValidationError(field_name, str(e)) from e


@dataclass(frozen=True)
class Quadratic(ClosedFormConvexFunction):
    """a*x^2/2 + b*x + c with a >= 0"""
    a: float = 1.0
    b: float = 0.0
    c: float = 0.0

    kind = FunctionKind.QUADRATIC

    def __post_init__(self):
        if not self.a >= 0:
            raise InvalidParameterError(f"quadratic requires a >= 0, got {self.a}")

    def evaluate(self, x):
        x = _as_column(x)
        return self.a * x * x / 2 + self.b * x + self.c

    def conjugate(self, s):
        s = _as_column(s)
        if self.a > 0:
            d = s - self.b
            return d * d / (2 * self.a) - self.c
        # affine: conjugate is an indicator of the slope
        return np.where(np.abs(s - self.b) <= DEFAULT_SNAP_TOL, -self.c, np.inf)

    def subgradient_pairs(self, xgrid, sgrid):
        return [(np.array([x]), np.array([self.a * x + self.b])) for x in xgrid.points()[:, 0]]

    def to_dict(self):
        return {'kind': self.kind.value, 'a': self.a, 'b': self.b, 'c': self.c}


@dataclass(frozen=True)
class AbsValue(ClosedFormConvexFunction):
    """|x|"""

    kind = FunctionKind.ABS

    def evaluate(self, x):
        return np.abs(_as_column(x))

    def conjugate(self, s):
        s = _as_column(s)
        return np.where(np.abs(s) <= 1.0, 0.0, np.inf)

    def subgradient_pairs(self, xgrid, sgrid):
        pairs = []
        for x in xgrid.points()[:, 0]:
            if x != 0.0:
                pairs.append((np.array([x]), np.array([np.sign(x)])))
        # full segment at the kink
        for s in sgrid.points()[:, 0]:
            if abs(s) <= 1.0:
                pairs.append((np.array([0.0]), np.array([s])))
        return pairs

    def to_dict(self):
        return {'kind': self.kind.value}


@dataclass(frozen=True)
class IndicatorPoint(ClosedFormConvexFunction):
    """0 at x0, +inf elsewhere"""
    x0: float = 0.0

    kind = FunctionKind.INDICATOR_POINT

    def evaluate(self, x):
        x = _as_column(x)
        return np.where(np.abs(x - self.x0) <= DEFAULT_SNAP_TOL, 0.0, np.inf)

    def conjugate(self, s):
        return _as_column(s) * self.x0

    def sample(self, grid: Grid) -> GridFunction:
        if grid.snap([self.x0]) is None:
            raise GridError(f"indicator point {self.x0} is off grid")
        return super().sample(grid)

    def subgradient_pairs(self, xgrid, sgrid):
        return [(np.array([self.x0]), np.array([s])) for s in sgrid.points()[:, 0]]

    def to_dict(self):
        return {'kind': self.kind.value, 'x0': self.x0}


@dataclass(frozen=True, eq=False)
class GridSamples(ClosedFormConvexFunction):
    """仅通过网格采样已知的函数"""
    samples: GridFunction

    kind = FunctionKind.SAMPLES

    def __post_init__(self):
        object.__setattr__(self, 'dim', self.samples.grid.dim)

    def evaluate(self, x):
        grid = self.samples.grid
        pts = np.asarray(x, dtype=np.float64).reshape(-1, grid.dim)
        out = np.empty(len(pts))
        for k, p in enumerate(pts):
            out[k] = self.samples.values[grid.require_node(p)]
        return out

    def conjugate(self, s):
        grid = self.samples.grid
        duals = np.asarray(s, dtype=np.float64).reshape(-1, grid.dim)
        finite = np.isfinite(self.samples.values)
        pts = grid.points()[finite]
        vals = self.samples.values[finite]
        return np.max(duals @ pts.T - vals[None, :], axis=1)

    def subgradient_pairs(self, xgrid, sgrid):
        # x* in the discrete subdifferential: f(y) >= f(x) + <y - x, x*> on all nodes
        grid = self.samples.grid
        pts = grid.points()
        vals = self.samples.values
        finite = np.isfinite(vals)
        pairs = []
        duals = sgrid.points()
        for i in np.flatnonzero(finite):
            gaps = vals[finite][None, :] - vals[i] - duals @ (pts[finite] - pts[i]).T
            for j in np.flatnonzero(np.all(gaps >= -DEFAULT_SNAP_TOL, axis=1)):
                pairs.append((pts[i].copy(), duals[j].copy()))
        return pairs

    def sample(self, grid):
        if grid == self.samples.grid:
            return self.samples
        return super().sample(grid)

    def to_dict(self):
        data = self.samples.to_dict()
        data['kind'] = self.kind.value
        return data


@dataclass(frozen=True)
class SeparableSum(ClosedFormConvexFunction):
    """f(x1, x2) = f1(x1) + f2(x2); conjugate is f1*(s1) + f2*(s2)"""
    terms: Tuple[ClosedFormConvexFunction, ...]

    kind = FunctionKind.SEPARABLE

    def __post_init__(self):
        if len(self.terms) != 2 or any(t.dim != 1 for t in self.terms):
            raise InvalidParameterError("separable sums take exactly two 1-D terms")
        object.__setattr__(self, 'dim', 2)

    def evaluate(self, x):
        pts = np.asarray(x, dtype=np.float64).reshape(-1, 2)
        return self.terms[0].evaluate(pts[:, 0]) + self.terms[1].evaluate(pts[:, 1])

    def conjugate(self, s):
        pts = np.asarray(s, dtype=np.float64).reshape(-1, 2)
        return self.terms[0].conjugate(pts[:, 0]) + self.terms[1].conjugate(pts[:, 1])

    def subgradient_pairs(self, xgrid, sgrid):
        parts = [
            t.subgradient_pairs(Grid((xgrid.axes[k],)), Grid((sgrid.axes[k],)))
            for k, t in enumerate(self.terms)
        ]
        return [
            (np.array([x1[0], x2[0]]), np.array([s1[0], s2[0]]))
            for x1, s1 in parts[0]
            for x2, s2 in parts[1]
        ]

    def to_dict(self):
        return {'kind': self.kind.value, 'terms': [t.to_dict() for t in self.terms]}
