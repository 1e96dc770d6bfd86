"""
凸表示实验的模型模块
"""

from .grid import Axis, Grid, GridFunction, Bifunction, require_same_dim
from .functions import (
    ClosedFormConvexFunction, FunctionKind, Quadratic, AbsValue,
    IndicatorPoint, GridSamples, SeparableSum,
)
from .operators import OperatorGraph, MonotoneViolation
from .reports import (
    ConjugateResult, CheckResult, MembershipReport, ResidualReport,
    EnlargementSet, TransportResult, AuditResult, InclusionAudit, SampleBatch,
)

__all__ = [
    'Axis', 'Grid', 'GridFunction', 'Bifunction', 'require_same_dim',
    'ClosedFormConvexFunction', 'FunctionKind', 'Quadratic', 'AbsValue',
    'IndicatorPoint', 'GridSamples', 'SeparableSum',
    'OperatorGraph', 'MonotoneViolation',
    'ConjugateResult', 'CheckResult', 'MembershipReport', 'ResidualReport',
    'EnlargementSet', 'TransportResult', 'AuditResult', 'InclusionAudit', 'SampleBatch',
]
