"""
服务模块 - 实验编排与带种子的采样
"""

from .experiment_service import (
    ExperimentConfig, ExperimentService, ExperimentSpec, SuiteResult,
    registry, require_passed,
)
from .samplers import sample_eps_subdifferential, sample_t_eps_identity, spawn_generators

__all__ = [
    'ExperimentConfig', 'ExperimentService', 'ExperimentSpec', 'SuiteResult',
    'registry', 'require_passed',
    'sample_eps_subdifferential', 'sample_t_eps_identity', 'spawn_generators',
]
