"""
算子图模型 - 点到集算子 T，以其图的有限采样来表示
"""

from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from ..exceptions import DimensionMismatchError, SpecValidationError
from ..utils.config import SUPPORTED_DIMENSIONS


@dataclass(frozen=True)
class MonotoneViolation:
    """无序对 (i, j)，满足 <x_i - x_j, x*_i - x*_j> = value < 0"""
    i: int
    j: int
    value: float

    def to_dict(self) -> Dict[str, Any]:
        return {'i': self.i, 'j': self.j, 'value': self.value}


@dataclass(frozen=True, eq=False)
class OperatorGraph:
    """非空且无重复的 (x, x*) 点对列表"""
    x: np.ndarray
    xstar: np.ndarray

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=np.float64))
        xstar = np.atleast_2d(np.asarray(self.xstar, dtype=np.float64))
        if x.shape[0] == 0:
            raise SpecValidationError("T.points", "operator graph must be nonempty")
        if x.shape != xstar.shape:
            raise DimensionMismatchError(f"graph coordinates differ in shape: {x.shape} vs {xstar.shape}")
        if x.shape[1] not in SUPPORTED_DIMENSIONS:
            raise DimensionMismatchError(f"graph dimension must be one of {SUPPORTED_DIMENSIONS}")
        if not (np.isfinite(x).all() and np.isfinite(xstar).all()):
            raise SpecValidationError("T.points", "graph coordinates must be finite")
        stacked = np.hstack([x, xstar])
        if len(np.unique(stacked, axis=0)) != len(stacked):
            raise SpecValidationError("T.points", "duplicate (x, x*) pairs")
        x.setflags(write=False)
        xstar.setflags(write=False)
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'xstar', xstar)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[Sequence[float], Sequence[float]]]) -> 'OperatorGraph':
        """
        由 (x, x*) 点对构造算子图，重复点对直接合并

        Args:
            pairs: (x, x*) 点对的可迭代对象
        """
        seen = {}
        for x, s in pairs:
            key = tuple(np.atleast_1d(np.asarray(x, dtype=np.float64))) + tuple(np.atleast_1d(np.asarray(s, dtype=np.float64)))
            seen.setdefault(key, None)
        if not seen:
            raise SpecValidationError("T.points", "operator graph must be nonempty")
        rows = np.array(list(seen.keys()), dtype=np.float64)
        d = rows.shape[1] // 2
        return cls(rows[:, :d], rows[:, d:])

    @classmethod
    def identity(cls, points: np.ndarray) -> 'OperatorGraph':
        pts = np.asarray(points, dtype=np.float64).reshape(len(points), -1)
        return cls(pts, pts.copy())

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def __len__(self) -> int:
        return self.x.shape[0]

    def pairs(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        return list(zip(self.x, self.xstar))

    def to_dict(self) -> Dict[str, Any]:
        return {'points': np.hstack([self.x, self.xstar]).tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any], field_name: str = 'T') -> 'OperatorGraph':
        if not isinstance(data, dict) or 'points' not in data:
            raise SpecValidationError(f"{field_name}.points", "missing")
        try:
            rows = np.array(data['points'], dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise SpecValidationError(f"{field_name}.points", str(e)) from e
        if rows.ndim != 2 or rows.shape[0] == 0 or rows.shape[1] % 2:
            raise SpecValidationError(f"{field_name}.points", "expected a non-empty list of [x..., xstar...] rows")
        d = rows.shape[1] // 2
        return cls(rows[:, :d], rows[:, d:])
