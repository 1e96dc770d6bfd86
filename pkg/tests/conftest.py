"""
Shared fixtures: standard grids, the identity operator and the
subdifferential of |x|
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from convrep_analysis.core.models import AbsValue, Grid, OperatorGraph, Quadratic
from convrep_analysis.core.numerics import subdifferential_graph
from convrep_analysis.core.services.experiment_service import ExperimentConfig


@pytest.fixture(scope="session")
def grid81():
    return Grid.uniform(-4.0, 4.0, 81)


@pytest.fixture(scope="session")
def identity_case(grid81):
    """T = identity sampled on [-4, 4] with n = 81, xgrid = sgrid"""
    return OperatorGraph.identity(grid81.points()), grid81, grid81


@pytest.fixture(scope="session")
def abs_case():
    """Graph of the subdifferential of |x|: x on [-2, 2], x* on [-1, 1]"""
    xgrid = Grid.uniform(-2.0, 2.0, 41)
    sgrid = Grid.uniform(-1.0, 1.0, 21)
    return subdifferential_graph(AbsValue(), xgrid, sgrid), xgrid, sgrid


@pytest.fixture(scope="session")
def quadratic():
    return Quadratic()


@pytest.fixture(scope="session")
def dual801():
    return Grid.uniform(-4.0, 4.0, 801)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def quiet_config(tmp_path):
    return ExperimentConfig(output_dir=str(tmp_path), seed=0, n_samples=500, show_progress=False)
