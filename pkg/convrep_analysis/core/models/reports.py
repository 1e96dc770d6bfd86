"""
结果模型 - 共轭、成员判定、不动点残差、扩张查询与审计结果
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from ..utils.config import AUDIT_THRESHOLD
from ..utils.extreal import format_extreal
from .grid import Bifunction, GridFunction


@dataclass(frozen=True, eq=False)
class ConjugateResult:
    """共轭值，以及每个输出节点上最大化点的扁平索引"""
    function: Union[GridFunction, Bifunction]
    argmax_index: np.ndarray
    has_sentinel: bool = False


@dataclass
class CheckResult:
    """成员报告中的一行"""
    passed: bool
    worst: float = 0.0
    worst_node: Optional[Dict[str, List[float]]] = None
    count: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'passed': self.passed,
            'worst': format_extreal(self.worst),
            'worst_node': self.worst_node,
            'count': self.count,
        }


@dataclass
class MembershipReport:
    """h 是否属于 H(T) 的判定：凸性、h >= pi、在 T 上 h = pi、等式集"""
    is_convex_on_grid: CheckResult
    minorizes_pi: CheckResult
    equals_pi_on_T: CheckResult
    equality_set_matches_T: CheckResult
    eq_tol: float = 1e-6

    @property
    def verdict(self) -> bool:
        return all(c.passed for c in (
            self.is_convex_on_grid, self.minorizes_pi,
            self.equals_pi_on_T, self.equality_set_matches_T,
        ))

    def failures(self) -> List[str]:
        return [name for name, c in self.checks().items() if not c.passed]

    def checks(self) -> Dict[str, CheckResult]:
        return {
            'is_convex_on_grid': self.is_convex_on_grid,
            'minorizes_pi': self.minorizes_pi,
            'equals_pi_on_T': self.equals_pi_on_T,
            'equality_set_matches_T': self.equality_set_matches_T,
        }

    def to_dict(self) -> Dict[str, Any]:
        data = {name: c.to_dict() for name, c in self.checks().items()}
        data['eq_tol'] = self.eq_tol
        data['verdict'] = self.verdict
        return data


@dataclass
class ResidualReport:
    """h 相对 Jh 的不动点残差"""
    sup_abs_diff: float
    finite_domain_mismatch: int
    is_in_Ha: bool
    worst_node: Optional[Dict[str, List[float]]] = None
    iteration: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'iteration': self.iteration,
            'sup_abs_diff': format_extreal(self.sup_abs_diff),
            'finite_domain_mismatch': self.finite_domain_mismatch,
            'is_in_Ha': self.is_in_Ha,
            'worst_node': self.worst_node,
        }


@dataclass(eq=False)
class EnlargementSet:
    """给定 eps 时在 x 处、限制在网格上的扩张查询结果"""
    x: np.ndarray
    eps: float
    members: np.ndarray                      # (m, d) dual grid points
    member_indices: np.ndarray               # flat dual grid indices
    interval: Optional[Tuple[float, float]] = None
    endpoint_uncertainty: float = 0.0

    @property
    def is_empty(self) -> bool:
        return len(self.member_indices) == 0

    def index_set(self) -> set:
        return set(int(i) for i in self.member_indices)

    def contains(self, xstar, tol: float = 1e-9) -> bool:
        xstar = np.atleast_1d(np.asarray(xstar, dtype=np.float64))
        if self.is_empty:
            return False
        return bool(np.any(np.all(np.abs(self.members - xstar) <= tol, axis=1)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'x': np.atleast_1d(self.x).tolist(),
            'eps': self.eps,
            'n_members': int(len(self.member_indices)),
            'interval': list(self.interval) if self.interval is not None else None,
            'endpoint_uncertainty': self.endpoint_uncertainty,
            'members': self.members.tolist(),
        }


@dataclass(frozen=True)
class TransportResult:
    """两个扩张元素的凸组合及其新的 eps"""
    xbar: Tuple[float, ...]
    xsbar: Tuple[float, ...]
    epsbar: float

    def to_dict(self) -> Dict[str, Any]:
        return {'xbar': list(self.xbar), 'xsbar': list(self.xsbar), 'epsbar': self.epsbar}


@dataclass
class AuditResult:
    """样本上可加性类性质的最差成对裕量"""
    property: str
    n_samples: int
    worst_margin: float
    witness_pair: Optional[List[Dict[str, Any]]] = None
    threshold: float = AUDIT_THRESHOLD

    @property
    def passed(self) -> bool:
        return self.worst_margin >= self.threshold

    def to_dict(self) -> Dict[str, Any]:
        return {
            'property': self.property,
            'n_samples': self.n_samples,
            'worst_margin': format_extreal(self.worst_margin),
            'witness_pair': self.witness_pair,
            'passed': self.passed,
        }


@dataclass
class InclusionAudit:
    """eps-次微分与其图的 T^eps 扩张之比较"""
    subset: bool
    strict: bool
    witnesses: List[List[float]] = field(default_factory=list)
    eps_subdifferential: Optional[EnlargementSet] = None
    t_eps: Optional[EnlargementSet] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'subset': self.subset,
            'strict': self.strict,
            'witnesses': self.witnesses,
            'eps_subdifferential': self.eps_subdifferential.to_dict() if self.eps_subdifferential else None,
            't_eps': self.t_eps.to_dict() if self.t_eps else None,
        }


@dataclass(eq=False)
class SampleBatch:
    """经过验证的扩张成员 (x, x*, eps)，按行堆叠"""
    x: np.ndarray           # (N, d)
    xstar: np.ndarray       # (N, d)
    eps: np.ndarray         # (N,)
    source: str = ""

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64).reshape(len(self.eps), -1)
        self.xstar = np.asarray(self.xstar, dtype=np.float64).reshape(self.x.shape)
        self.eps = np.asarray(self.eps, dtype=np.float64).reshape(-1)

    @classmethod
    def from_tuples(cls, samples, source: str = "") -> 'SampleBatch':
        samples = list(samples)
        x = [np.atleast_1d(np.asarray(s[0], dtype=np.float64)) for s in samples]
        xs = [np.atleast_1d(np.asarray(s[1], dtype=np.float64)) for s in samples]
        return cls(np.array(x), np.array(xs), np.array([float(s[2]) for s in samples]), source)

    def __len__(self) -> int:
        return len(self.eps)

    def row(self, k: int) -> Dict[str, Any]:
        return {'x': self.x[k].tolist(), 'xstar': self.xstar[k].tolist(), 'eps': float(self.eps[k])}
