"""
Enlargement calculus - eps-subdifferentials, T^eps, sublevel enlargements of
a representing function, the transportation formula and pairwise audits
"""

import logging
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import InvalidParameterError, PropertyViolationError
from .models.functions import ClosedFormConvexFunction
from .models.grid import Bifunction, Grid
from .models.operators import OperatorGraph
from .models.reports import AuditResult, EnlargementSet, InclusionAudit, SampleBatch, TransportResult
from .numerics import graph_margin, pairing_matrix, row_chunks, subdifferential_graph
from .representations import conjugate_on, fenchel_young_value
from .utils.config import AUDIT_CHUNK_ROWS, AUDIT_THRESHOLD, MEMBERSHIP_SLACK, WEIGHT_TOL

logger = logging.getLogger(__name__)

Triple = Tuple[Union[float, Sequence[float]], Union[float, Sequence[float]], float]


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not np.isfinite(eps) or eps < 0:
        raise InvalidParameterError(f"eps must be a finite number >= 0, got {eps}")
    return eps


def _as_point(x, dim: int) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64)).reshape(-1)
    if x.size != dim:
        raise InvalidParameterError(f"expected a {dim}-D point, got {x.size} coordinates")
    return x


def _sublevel(x: np.ndarray, eps: float, sgrid: Grid, gap: np.ndarray,
              slack: float = MEMBERSHIP_SLACK) -> EnlargementSet:
    """Grid points s with gap(s) <= eps + slack, plus the interval view in 1-D"""
    with np.errstate(invalid='ignore'):
        inside = gap <= eps + slack
    indices = np.flatnonzero(inside)
    members = sgrid.points()[indices]
    interval = None
    uncertainty = 0.0
    if sgrid.dim == 1 and indices.size and indices[-1] - indices[0] + 1 == indices.size:
        interval = (float(members[0, 0]), float(members[-1, 0]))
        uncertainty = float(sgrid.steps[0])
    return EnlargementSet(x, eps, members, indices, interval, uncertainty)


# ---------------------------------------------------------------------------
# set queries
# ---------------------------------------------------------------------------

def eps_subdifferential(f: ClosedFormConvexFunction, x, eps: float, sgrid: Grid) -> EnlargementSet:
    """
    Grid points of the eps-subdifferential of f at x

    Uses the sublevel form f(x) + f*(s) - <x, s> <= eps with slack 1e-9.
    """
    eps = _check_eps(eps)
    x = _as_point(x, f.dim)
    fx = f.evaluate(x if f.dim > 1 else x[0])[0]
    h_row = fx + conjugate_on(f, sgrid)
    gap = h_row - pairing_matrix(x[None, :], sgrid.points())[0]
    return _sublevel(x, eps, sgrid, gap)


def t_eps(T: OperatorGraph, x, eps: float, sgrid: Grid) -> EnlargementSet:
    """
    Grid points s with <x - y, s - y*> >= -eps for every (y, y*) in T

    The defining inequality is checked directly against every graph point,
    with slack 1e-9.
    """
    eps = _check_eps(eps)
    x = _as_point(x, T.dim)
    xs = np.repeat(x[None, :], sgrid.size, axis=0)
    gap = -graph_margin(T, xs, sgrid.points())
    return _sublevel(x, eps, sgrid, gap)


def enlargement_from_h(h: Bifunction, x, eps: float) -> EnlargementSet:
    """Sublevel enlargement {s : h(x, s) <= <x, s> + eps} on h's row at x"""
    eps = _check_eps(eps)
    x = _as_point(x, h.dim)
    row = h.row(x)
    gap = row - pairing_matrix(x[None, :], h.sgrid.points())[0]
    return _sublevel(x, eps, h.sgrid, gap)


def is_eps_subgradient(f: ClosedFormConvexFunction, x, xstar, eps: float,
                       slack: float = MEMBERSHIP_SLACK) -> bool:
    """Closed-form membership of xstar in the eps-subdifferential at an arbitrary x"""
    x = _as_point(x, f.dim)
    xstar = _as_point(xstar, f.dim)
    return fenchel_young_value(f, x, xstar) - float(np.dot(x, xstar)) <= eps + slack


# ---------------------------------------------------------------------------
# transportation formula
# ---------------------------------------------------------------------------

def transport(p1: Triple, p2: Triple, p: float, q: float,
              f: Optional[ClosedFormConvexFunction] = None) -> TransportResult:
    """
    Convex combination of two enlargement elements

    xbar = p x1 + q x2, xsbar = p x1* + q x2*,
    epsbar = p eps1 + q eps2 + p q <x1 - x2, x1* - x2*>.

    Args:
        p1, p2: (x, x*, eps) triples
        p, q: nonnegative weights summing to one
        f: when given and both inputs are exact members of the eps-subdifferentials
           of f, epsbar >= -1e-12 is asserted

    Returns:
        TransportResult
    """
    if p < 0 or q < 0 or abs(p + q - 1.0) > WEIGHT_TOL:
        raise InvalidParameterError(f"weights must be >= 0 and sum to 1, got p={p}, q={q}")
    (x1, s1, e1), (x2, s2, e2) = p1, p2
    e1, e2 = _check_eps(e1), _check_eps(e2)
    x1, s1, x2, s2 = (np.atleast_1d(np.asarray(v, dtype=np.float64)) for v in (x1, s1, x2, s2))
    if not (x1.shape == s1.shape == x2.shape == s2.shape):
        raise InvalidParameterError("transport inputs must share one dimension")

    xbar = p * x1 + q * x2
    xsbar = p * s1 + q * s2
    epsbar = p * e1 + q * e2 + p * q * float(np.dot(x1 - x2, s1 - s2))

    if f is not None and is_eps_subgradient(f, x1, s1, e1, 0.0) and is_eps_subgradient(f, x2, s2, e2, 0.0):
        if epsbar < -1e-12:
            raise PropertyViolationError(f"transported eps is negative: {epsbar:.3e}")
    return TransportResult(tuple(xbar.tolist()), tuple(xsbar.tolist()), float(epsbar))


# ---------------------------------------------------------------------------
# pairwise audits
# ---------------------------------------------------------------------------

def _strong_bound(e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    return e1 + e2


def _weak_bound(e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    r = np.sqrt(e1) + np.sqrt(e2)
    return r * r


def _pairwise_audit(samples: Union[SampleBatch, Sequence[Triple]], name: str,
                    bound: Callable[[np.ndarray, np.ndarray], np.ndarray],
                    threshold: float = AUDIT_THRESHOLD) -> AuditResult:
    """min over unordered pairs of <x1 - x2, x1* - x2*> + bound(eps1, eps2)"""
    batch = samples if isinstance(samples, SampleBatch) else SampleBatch.from_tuples(samples)
    n = len(batch)
    if n < 2:
        return AuditResult(name, n, np.inf, threshold=threshold)

    worst = np.inf
    witness = None
    for rows in row_chunks(n, n * batch.x.shape[1], AUDIT_CHUNK_ROWS * n * batch.x.shape[1]):
        dx = batch.x[rows, None, :] - batch.x[None, :, :]
        ds = batch.xstar[rows, None, :] - batch.xstar[None, :, :]
        margin = np.sum(dx * ds, axis=2) + bound(batch.eps[rows, None], batch.eps[None, :])
        # unordered pairs: keep j > i only
        i_index = np.arange(rows.start, rows.stop)[:, None]
        margin = np.where(np.arange(n)[None, :] > i_index, margin, np.inf)
        k = int(np.argmin(margin))
        if margin.flat[k] < worst:
            worst = float(margin.flat[k])
            i, j = divmod(k, n)
            witness = (rows.start + i, j)

    pair = [batch.row(witness[0]), batch.row(witness[1])] if witness is not None else None
    result = AuditResult(name, n, worst, witness_pair=pair, threshold=threshold)
    logger.info(f"{name} audit over {n} samples: worst margin {worst:.3e} (passed={result.passed})")
    return result


def additivity_audit(samples: Union[SampleBatch, Sequence[Triple]],
                     threshold: float = AUDIT_THRESHOLD) -> AuditResult:
    """
    Worst margin of <x1 - x2, x1* - x2*> >= -(eps1 + eps2) over all pairs

    Samples of a sublevel enlargement of h are additive when h >= Jh; pass
    threshold=-tol to audit them against h >= Jh - tol.
    """
    return _pairwise_audit(samples, "additivity", _strong_bound, threshold)


def weak_additivity_audit(samples: Union[SampleBatch, Sequence[Triple]]) -> AuditResult:
    """Worst margin against the weaker bound -(sqrt(eps1) + sqrt(eps2))^2"""
    return _pairwise_audit(samples, "weak_additivity", _weak_bound)


# ---------------------------------------------------------------------------
# inclusion of the eps-subdifferential in the enlargement of its graph
# ---------------------------------------------------------------------------

def inclusion_audit(f: ClosedFormConvexFunction, x, eps: float, sgrid: Grid,
                    xgrid: Optional[Grid] = None, refine: int = 2) -> InclusionAudit:
    """
    Compare the eps-subdifferential of f at x with T^eps(x) for T = graph of df

    The graph is sampled analytically on xgrid (default sgrid) refined by the
    given factor, so that midpoints between dual nodes are graph abscissae.
    """
    graph_grid = (xgrid or sgrid).refined(refine) if refine > 1 else (xgrid or sgrid)
    T = subdifferential_graph(f, graph_grid, sgrid)
    small = eps_subdifferential(f, x, eps, sgrid)
    large = t_eps(T, x, eps, sgrid)
    small_idx, large_idx = small.index_set(), large.index_set()
    extra = sorted(large_idx - small_idx)
    witnesses = [sgrid.points()[k].tolist() for k in extra]
    audit = InclusionAudit(
        subset=small_idx <= large_idx,
        strict=bool(extra) and small_idx <= large_idx,
        witnesses=witnesses,
        eps_subdifferential=small,
        t_eps=large,
    )
    if not audit.subset:
        logger.warning(f"eps-subdifferential at x={list(small.x)} is not inside T^eps")
    return audit
