"""
带种子的扩张成员采样器

每个采样器先从精确的连续集合中抽样，再以容差 0 复核定义不等式，
只保留通过复核的样本。
"""

import logging
from typing import Optional, Tuple

import numpy as np

from ..exceptions import InvalidParameterError
from ..models.functions import AbsValue, ClosedFormConvexFunction, Quadratic
from ..models.grid import Bifunction, Grid, GridFunction
from ..models.operators import OperatorGraph
from ..models.reports import SampleBatch
from ..numerics import graph_margin
from ..utils.config import MEMBERSHIP_SLACK

logger = logging.getLogger(__name__)

MAX_ROUNDS = 50


def spawn_generators(seed: int, n: int) -> list:
    """Independent child generators of one root seed"""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def _propose_eps_subgradients(f: ClosedFormConvexFunction, n: int, rng: np.random.Generator,
                              x_range: Tuple[float, float], eps_range: Tuple[float, float]):
    x = rng.uniform(*x_range, size=n)
    eps = rng.uniform(*eps_range, size=n)
    if isinstance(f, Quadratic) and f.a > 0:
        # exact set: |s - (a x + b)| <= sqrt(2 a eps)
        u = rng.uniform(-1.0, 1.0, size=n)
        s = f.a * x + f.b + u * np.sqrt(2 * f.a * eps)
    elif isinstance(f, AbsValue):
        s = rng.uniform(-1.0, 1.0, size=n)
    else:
        raise InvalidParameterError(f"no eps-subgradient sampler for {f.kind.value}")
    return x, s, eps


def sample_eps_subdifferential(f: ClosedFormConvexFunction, n: int, rng: np.random.Generator,
                               x_range: Tuple[float, float] = (-3.0, 3.0),
                               eps_range: Tuple[float, float] = (0.0, 1.0)) -> SampleBatch:
    """
    生成 n 个精确满足 f(x) + f*(x*) - x x* <= eps 的三元组 (x, x*, eps)

    支持 a*x^2/2 + b*x + c（a > 0）与 |x|。

    Args:
        f: 闭式凸函数
        n: 样本数
        rng: 随机数生成器
        x_range: x 的抽样区间
        eps_range: eps 的抽样区间
    """
    xs, ss, es = [], [], []
    count = 0
    for _ in range(MAX_ROUNDS):
        x, s, eps = _propose_eps_subgradients(f, n, rng, x_range, eps_range)
        with np.errstate(invalid='ignore'):
            ok = f.evaluate(x) + f.conjugate(s) - x * s <= eps
        xs.append(x[ok]); ss.append(s[ok]); es.append(eps[ok])
        count += int(ok.sum())
        if count >= n:
            break
    else:
        raise InvalidParameterError(f"sampler accepted only {count} of {n} requested members")
    x, s, eps = (np.concatenate(a)[:n] for a in (xs, ss, es))
    logger.debug(f"Sampled {n} eps-subgradients of {f.kind.value}")
    return SampleBatch(x[:, None], s[:, None], eps, source=f"eps_subdifferential:{f.kind.value}")


def sample_t_eps_identity(n: int, rng: np.random.Generator, graph: OperatorGraph,
                          x_range: Tuple[float, float] = (-3.0, 3.0),
                          eps_range: Tuple[float, float] = (0.0, 1.0),
                          eps: Optional[float] = None) -> SampleBatch:
    """
    生成 n 个经过验证的 T^eps 成员，其中 T 为恒等算子

    候选点 s = x + t * 2 sqrt(eps)，|t| <= 1，属于连续扩张；
    每个候选点都会与 graph 的所有点逐一复核。

    Args:
        n: 样本数
        rng: 随机数生成器
        graph: 恒等算子的采样图
        x_range: x 的抽样区间
        eps_range: eps 的抽样区间
        eps: 固定的 eps，给定时覆盖 eps_range
    """
    xs, ss, es = [], [], []
    count = 0
    for _ in range(MAX_ROUNDS):
        x = rng.uniform(*x_range, size=n)
        e = np.full(n, float(eps)) if eps is not None else rng.uniform(*eps_range, size=n)
        t = rng.uniform(-1.0, 1.0, size=n)
        s = x + t * 2 * np.sqrt(e)
        ok = graph_margin(graph, x[:, None], s[:, None]) >= -e
        xs.append(x[ok]); ss.append(s[ok]); es.append(e[ok])
        count += int(ok.sum())
        if count >= n:
            break
    else:
        raise InvalidParameterError(f"sampler accepted only {count} of {n} requested members")
    x, s, e = (np.concatenate(a)[:n] for a in (xs, ss, es))
    return SampleBatch(x[:, None], s[:, None], e, source="t_eps:identity")


def t_eps_grid_members(T: OperatorGraph, eps: float, xgrid: Grid, sgrid: Grid) -> SampleBatch:
    """Every grid node (x, s) with s in T^eps(x), as one batch at constant eps"""
    x = np.repeat(xgrid.points(), sgrid.size, axis=0)
    s = np.tile(sgrid.points(), (xgrid.size, 1))
    ok = graph_margin(T, x, s) >= -eps - MEMBERSHIP_SLACK
    return SampleBatch(x[ok], s[ok], np.full(int(ok.sum()), float(eps)), source="t_eps:grid")


def sample_h_enlargement(h: Bifunction, n: int, rng: np.random.Generator,
                         extra_range: Tuple[float, float] = (0.0, 0.0)) -> SampleBatch:
    """
    生成 n 个 h 的下水平集扩张中的网格成员 (x, x*, eps)

    在 h 的有限定义域上均匀抽取节点，取 eps = max(h - <x, x*>, 0) + extra；
    extra 为 0 时即为容纳该节点的最小水平。保留前逐一用 h 复核。

    Args:
        h: 双变量函数
        n: 样本数
        rng: 随机数生成器
        extra_range: 附加 eps 的抽样区间
    """
    finite = np.flatnonzero(np.isfinite(h.values).ravel())
    if finite.size == 0:
        raise InvalidParameterError("bifunction has an empty finite domain")
    gap = (h.values - h.xgrid.points() @ h.sgrid.points().T).ravel()
    picks = finite[rng.integers(finite.size, size=n)]
    eps = np.maximum(gap[picks], 0.0) + rng.uniform(*extra_range, size=n)
    ok = gap[picks] <= eps
    if not ok.all():
        raise InvalidParameterError(f"{int((~ok).sum())} sublevel samples failed their own check")
    i, j = np.unravel_index(picks, h.shape)
    return SampleBatch(h.xgrid.points()[i], h.sgrid.points()[j], eps, source="h_sublevel")


def random_bifunction(rng: np.random.Generator, xgrid: Grid, sgrid: Grid,
                      inf_fraction: float = 0.3) -> Bifunction:
    """Proper random samples with a random +inf pattern"""
    values = rng.normal(size=(xgrid.size, sgrid.size))
    values[rng.random(values.shape) < inf_fraction] = np.inf
    if not np.isfinite(values).any():
        values.flat[rng.integers(values.size)] = 0.0
    return Bifunction(xgrid, sgrid, values)


def random_convex_samples(rng: np.random.Generator, grid: Grid) -> GridFunction:
    """a x^2/2 + b x + c |x - k| with a, c >= 0 on a 1-D grid"""
    x = grid.points()[:, 0]
    a, c = rng.uniform(0.0, 2.0, size=2)
    b = rng.uniform(-2.0, 2.0)
    k = rng.uniform(x[0], x[-1])
    return GridFunction(grid, a * x * x / 2 + b * x + c * np.abs(x - k))
