"""
网格模型 - 均匀盒形网格及定义在其上的采样函数
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import DimensionMismatchError, GridError, SpecValidationError
from ..utils.config import DEFAULT_SNAP_TOL, MIN_AXIS_POINTS, SUPPORTED_DIMENSIONS
from ..utils.extreal import format_extreal, is_proper, parse_extreal, validate_samples


@dataclass(frozen=True)
class Axis:
    """均匀坐标轴：从 lo 到 hi（含端点）共 n 个点"""
    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise GridError(f"axis bounds must be finite, got [{self.lo}, {self.hi}]")
        if not self.lo < self.hi:
            raise GridError(f"axis requires lo < hi, got [{self.lo}, {self.hi}]")
        if int(self.n) != self.n or self.n < MIN_AXIS_POINTS:
            raise GridError(f"axis requires n >= {MIN_AXIS_POINTS}, got {self.n}")

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)

    def point(self, i: int) -> float:
        if i == self.n - 1:
            return float(self.hi)
        return float(self.lo + i * (self.hi - self.lo) / (self.n - 1))

    def points(self) -> np.ndarray:
        pts = self.lo + np.arange(self.n) * (self.hi - self.lo) / (self.n - 1)
        pts[-1] = self.hi
        return pts

    def snap(self, value: float, snap_tol: float = DEFAULT_SNAP_TOL) -> Optional[int]:
        """Index of the node within snap_tol of value, or None"""
        i = int(round((value - self.lo) / self.step))
        if i < 0 or i >= self.n:
            return None
        if abs(self.point(i) - value) <= snap_tol:
            return i
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {'lo': float(self.lo), 'hi': float(self.hi), 'n': int(self.n)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any], field_name: str = 'axis') -> 'Axis':
        try:
            return cls(lo=float(data['lo']), hi=float(data['hi']), n=int(data['n']))
        except KeyError as e:
            raise SpecValidationError(f"{field_name}.{e.args[0]}", "missing") from e
        except (TypeError, ValueError) as e:
            raise SpecValidationError(field_name, str(e)) from e


@dataclass(frozen=True)
class Grid:
    """均匀坐标轴的乘积；节点按行优先顺序遍历"""
    axes: Tuple[Axis, ...]

    def __post_init__(self):
        object.__setattr__(self, 'axes', tuple(self.axes))
        if len(self.axes) not in SUPPORTED_DIMENSIONS:
            raise GridError(f"grid dimension must be one of {SUPPORTED_DIMENSIONS}, got {len(self.axes)}")

    @classmethod
    def uniform(cls, lo: float, hi: float, n: int, dim: int = 1) -> 'Grid':
        return cls(tuple(Axis(lo, hi, n) for _ in range(dim)))

    def refined(self, factor: int = 2) -> 'Grid':
        """Same box with factor times as many cells per axis"""
        return Grid(tuple(Axis(a.lo, a.hi, (a.n - 1) * factor + 1) for a in self.axes))

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(a.n for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def steps(self) -> np.ndarray:
        return np.array([a.step for a in self.axes])

    @cached_property
    def _points(self) -> np.ndarray:
        mesh = np.meshgrid(*[a.points() for a in self.axes], indexing='ij')
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        pts.setflags(write=False)
        return pts

    def points(self) -> np.ndarray:
        """(size, dim) array of nodes, row-major"""
        return self._points

    def snap(self, point: Sequence[float], snap_tol: float = DEFAULT_SNAP_TOL) -> Optional[int]:
        """
        查找距 point 在 snap_tol（无穷范数）以内的节点

        Args:
            point: 待对齐的点，长度为网格维数
            snap_tol: 对齐容差

        Returns:
            节点的扁平索引；不存在时返回 None
        """
        point = np.atleast_1d(np.asarray(point, dtype=np.float64))
        if point.shape != (self.dim,):
            raise DimensionMismatchError(f"point of dimension {point.size} on a {self.dim}-D grid")
        idx = []
        for axis, value in zip(self.axes, point):
            i = axis.snap(float(value), snap_tol)
            if i is None:
                return None
            idx.append(i)
        return int(np.ravel_multi_index(tuple(idx), self.shape))

    def require_node(self, point: Sequence[float], snap_tol: float = DEFAULT_SNAP_TOL) -> int:
        index = self.snap(point, snap_tol)
        if index is None:
            raise GridError(f"point {list(np.atleast_1d(point))} is not a grid node")
        return index

    def to_dict(self) -> Dict[str, Any]:
        return {'axes': [a.to_dict() for a in self.axes]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any], field_name: str = 'grid') -> 'Grid':
        if not isinstance(data, dict) or 'axes' not in data:
            raise SpecValidationError(f"{field_name}.axes", "missing")
        axes = data['axes']
        if not isinstance(axes, list) or not axes:
            raise SpecValidationError(f"{field_name}.axes", "must be a non-empty list")
        try:
            return cls(tuple(Axis.from_dict(a, f"{field_name}.axes[{i}]") for i, a in enumerate(axes)))
        except GridError as e:
            raise SpecValidationError(f"{field_name}.axes", str(e)) from e


def require_same_dim(a: Grid, b: Grid) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"grid dimensions differ: {a.dim} vs {b.dim}")


@dataclass(frozen=True, eq=False)
class GridFunction:
    """f（或 f*）在网格上的广义实值采样"""
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = validate_samples(self.values, allow_sentinel=True).reshape(-1).copy()
        if values.size != self.grid.size:
            raise GridError(f"expected {self.grid.size} samples, got {values.size}")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @property
    def is_proper(self) -> bool:
        return is_proper(self.values)

    def with_values(self, values: np.ndarray) -> 'GridFunction':
        return GridFunction(self.grid, values)

    def value_at(self, point: Sequence[float]) -> float:
        return float(self.values[self.grid.require_node(point)])

    def to_dict(self) -> Dict[str, Any]:
        return {
            'grid': self.grid.to_dict(),
            'values': [format_extreal(v) for v in self.values],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], field_name: str = 'function') -> 'GridFunction':
        grid = Grid.from_dict(data.get('grid'), f"{field_name}.grid")
        try:
            values = np.array([parse_extreal(v) for v in data['values']], dtype=np.float64)
        except KeyError as e:
            raise SpecValidationError(f"{field_name}.values", "missing") from e
        except (TypeError, ValueError) as e:
            raise SpecValidationError(f"{field_name}.values", str(e)) from e
        if values.size != grid.size:
            raise SpecValidationError(f"{field_name}.values", f"expected {grid.size} samples, got {values.size}")
        return cls(grid, values)


@dataclass(frozen=True, eq=False)
class Bifunction:
    """
    h 在 xgrid x sgrid 上的广义实值采样

    values 的形状为 (xgrid.size, sgrid.size)，两个网格维数相同。
    """
    xgrid: Grid
    sgrid: Grid
    values: np.ndarray

    def __post_init__(self):
        require_same_dim(self.xgrid, self.sgrid)
        values = validate_samples(self.values, allow_sentinel=True)
        if values.size != self.xgrid.size * self.sgrid.size:
            raise GridError(
                f"expected {self.xgrid.size}x{self.sgrid.size} samples, got {values.size}"
            )
        values = values.reshape(self.xgrid.size, self.sgrid.size).copy()
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @property
    def dim(self) -> int:
        return self.xgrid.dim

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    @property
    def size(self) -> int:
        return int(self.values.size)

    @property
    def is_proper(self) -> bool:
        return is_proper(self.values)

    def same_grids(self, other: 'Bifunction') -> bool:
        return self.xgrid == other.xgrid and self.sgrid == other.sgrid

    def with_values(self, values: np.ndarray) -> 'Bifunction':
        return Bifunction(self.xgrid, self.sgrid, values)

    def node_points(self) -> np.ndarray:
        """(size, 2*dim) array of (x, s) node coordinates, row-major"""
        xs = np.repeat(self.xgrid.points(), self.sgrid.size, axis=0)
        ss = np.tile(self.sgrid.points(), (self.xgrid.size, 1))
        return np.hstack([xs, ss])

    def node_coords(self, flat_index: int) -> Tuple[List[float], List[float]]:
        i, j = divmod(int(flat_index), self.sgrid.size)
        return self.xgrid.points()[i].tolist(), self.sgrid.points()[j].tolist()

    def row(self, x: Sequence[float], snap_tol: float = DEFAULT_SNAP_TOL) -> np.ndarray:
        return self.values[self.xgrid.require_node(x, snap_tol)]

    def value_at(self, x: Sequence[float], s: Sequence[float]) -> float:
        i = self.xgrid.require_node(x)
        j = self.sgrid.require_node(s)
        return float(self.values[i, j])

    def tensor(self) -> np.ndarray:
        """Values reshaped to one array axis per grid axis (x axes first)"""
        return self.values.reshape(self.xgrid.shape + self.sgrid.shape)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'xgrid': self.xgrid.to_dict(),
            'sgrid': self.sgrid.to_dict(),
            'values': [[format_extreal(v) for v in row] for row in self.values],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], field_name: str = 'h') -> 'Bifunction':
        xgrid = Grid.from_dict(data.get('xgrid'), f"{field_name}.xgrid")
        sgrid = Grid.from_dict(data.get('sgrid', data.get('xgrid')), f"{field_name}.sgrid")
        if xgrid.dim != sgrid.dim:
            raise SpecValidationError(f"{field_name}.sgrid", "dimension differs from xgrid")
        try:
            values = np.array([[parse_extreal(v) for v in row] for row in data['values']], dtype=np.float64)
        except KeyError as e:
            raise SpecValidationError(f"{field_name}.values", "missing") from e
        except (TypeError, ValueError) as e:
            raise SpecValidationError(f"{field_name}.values", str(e)) from e
        if values.size != xgrid.size * sgrid.size:
            raise SpecValidationError(
                f"{field_name}.values", f"expected {xgrid.size}x{sgrid.size} samples, got {values.size}"
            )
        return cls(xgrid, sgrid, values)
