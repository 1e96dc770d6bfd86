"""
Convex representations of a monotone operator T

Builds the canonical members of H(T) (Fenchel-Young function, Fitzpatrick
function, sigma_T) on grid pairs and checks membership node by node.
"""

import itertools
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .conjugation import clconv, conjugate_bruteforce
from .exceptions import GridError, NonMonotoneError
from .models.functions import ClosedFormConvexFunction, GridSamples
from .models.grid import Bifunction, Grid, require_same_dim
from .models.operators import OperatorGraph
from .models.reports import CheckResult, MembershipReport
from .numerics import (
    check_monotone, graph_mask, indicator_of_graph, pairing_matrix,
    pi_bifunction, row_chunks, snap_graph,
)
from .utils.config import DEFAULT_EQ_TOL, DEFAULT_SNAP_TOL, MIDPOINT_TOL, MINORANT_TOL

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Fenchel-Young function
# ---------------------------------------------------------------------------

def conjugate_on(f: ClosedFormConvexFunction, sgrid: Grid) -> np.ndarray:
    """f* on sgrid nodes: closed form when known, brute force for samples"""
    if isinstance(f, GridSamples):
        return conjugate_bruteforce(f.samples, sgrid).function.values
    pts = sgrid.points()
    return f.conjugate(pts[:, 0] if f.dim == 1 else pts)


def fenchel_young(f: ClosedFormConvexFunction, xgrid: Grid, sgrid: Optional[Grid] = None) -> Bifunction:
    """h_FY(x, s) = f(x) + f*(s)"""
    sgrid = sgrid or xgrid
    require_same_dim(xgrid, sgrid)
    fx = f.sample(xgrid).values
    fstar = conjugate_on(f, sgrid)
    return Bifunction(xgrid, sgrid, fx[:, None] + fstar[None, :])


def fenchel_young_value(f: ClosedFormConvexFunction, x: Sequence[float], s: Sequence[float]) -> float:
    """Closed-form h_FY at an arbitrary (x, s), not restricted to grid nodes"""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    s = np.atleast_1d(np.asarray(s, dtype=np.float64))
    arg_x = x if f.dim > 1 else x[0]
    arg_s = s if f.dim > 1 else s[0]
    return float(f.evaluate(arg_x)[0] + f.conjugate(arg_s)[0])


# ---------------------------------------------------------------------------
# Fitzpatrick function and sigma_T
# ---------------------------------------------------------------------------

def _require_monotone(T: OperatorGraph) -> None:
    violations = check_monotone(T)
    if violations:
        raise NonMonotoneError(violations)


def fitzpatrick(T: OperatorGraph, xgrid: Grid, sgrid: Optional[Grid] = None,
                check: bool = True) -> Bifunction:
    """
    phi_T(x, s) = max over (y, y*) in T of <x, y*> + <y, s> - <y, y*>

    Standard reading of the defining sup (the <x - y, y* - x*> form); as a max
    of affine functions it is finite and convex on every grid.
    """
    sgrid = sgrid or xgrid
    require_same_dim(xgrid, sgrid)
    if T.dim != xgrid.dim:
        raise GridError(f"{T.dim}-D graph on {xgrid.dim}-D grids")
    if check:
        _require_monotone(T)

    return Bifunction(xgrid, sgrid, fitzpatrick_rows(T, xgrid.points(), sgrid.points()))


def fitzpatrick_rows(T: OperatorGraph, X: np.ndarray, S: np.ndarray) -> np.ndarray:
    """phi_T on the product of arbitrary point sets X (rows) and S (columns)"""
    A = pairing_matrix(X, T.xstar)          # <x, y*>
    B = pairing_matrix(S, T.x)              # <y, s>
    c = np.sum(T.x * T.xstar, axis=1)       # <y, y*>
    values = np.empty((len(X), len(S)))
    for rows in row_chunks(len(X), len(S) * len(T)):
        values[rows] = np.max(A[rows, None, :] + B[None, :, :] - c[None, None, :], axis=2)
    return values


def monotone_gap(T: OperatorGraph, xgrid: Grid, sgrid: Grid) -> np.ndarray:
    """max over (y, y*) in T of -<x - y, s - y*> at every node"""
    X = xgrid.points()
    S = sgrid.points()
    gap = np.empty((xgrid.size, sgrid.size))
    for rows in row_chunks(xgrid.size, sgrid.size * len(T) * T.dim):
        dx = X[rows, None, None, :] - T.x[None, None, :, :]
        ds = S[None, :, None, :] - T.xstar[None, None, :, :]
        gap[rows] = np.max(-np.sum(dx * ds, axis=3), axis=2)
    return gap


def monotone_closure(T: OperatorGraph, xgrid: Grid, sgrid: Optional[Grid] = None,
                     tol: float = MINORANT_TOL) -> np.ndarray:
    """Grid nodes monotonically related to every graph point"""
    sgrid = sgrid or xgrid
    return monotone_gap(T, xgrid, sgrid) <= tol


def is_maximal_on_grid(T: OperatorGraph, xgrid: Grid, sgrid: Optional[Grid] = None,
                       snap_tol: float = DEFAULT_SNAP_TOL) -> bool:
    """
    Grid surrogate of maximality

    The monotone closure may only add nodes within one grid step of a snapped
    graph node; a sampled graph cannot resolve anything closer.
    """
    sgrid = sgrid or xgrid
    closure = monotone_closure(T, xgrid, sgrid)
    snapped = graph_mask(T, xgrid, sgrid, snap_tol)
    extra = np.argwhere(closure & ~snapped)
    if len(extra) == 0:
        return True
    X, S = xgrid.points(), sgrid.points()
    gi, gj = np.nonzero(snapped)
    steps = np.concatenate([xgrid.steps, sgrid.steps])
    graph_nodes = np.hstack([X[gi], S[gj]]) / steps
    for rows in row_chunks(len(extra), len(graph_nodes) * steps.size):
        nodes = np.hstack([X[extra[rows, 0]], S[extra[rows, 1]]]) / steps
        dist = np.max(np.abs(nodes[:, None, :] - graph_nodes[None, :, :]), axis=2).min(axis=1)
        if np.any(dist > 1 + 1e-9):
            return False
    return True


def sigma(T: OperatorGraph, xgrid: Grid, sgrid: Optional[Grid] = None,
          snap_tol: float = DEFAULT_SNAP_TOL) -> Bifunction:
    """sigma_T = clconv(pi + delta_T); every graph point must be a grid node"""
    sgrid = sgrid or xgrid
    graph_mask(T, xgrid, sgrid, snap_tol, strict=True)
    base = pi_bifunction(xgrid, sgrid).values + indicator_of_graph(T, xgrid, sgrid, snap_tol).values
    return clconv(Bifunction(xgrid, sgrid, base))


def pointwise_max(h: Bifunction, g: Bifunction) -> Bifunction:
    if not h.same_grids(g):
        raise GridError("pointwise max of bifunctions on different grids")
    return h.with_values(np.maximum(h.values, g.values))


# ---------------------------------------------------------------------------
# membership in H(T)
# ---------------------------------------------------------------------------

def _node_dict(h: Bifunction, flat_index: int) -> Dict[str, List[float]]:
    x, s = h.node_coords(flat_index)
    return {'x': x, 'xstar': s}


def _directions(n_axes: int) -> List[Tuple[int, ...]]:
    """Axis directions plus both diagonals of every pair of axes"""
    dirs = []
    for k in range(n_axes):
        e = [0] * n_axes
        e[k] = 1
        dirs.append(tuple(e))
    for k, l in itertools.combinations(range(n_axes), 2):
        for sign in (1, -1):
            e = [0] * n_axes
            e[k], e[l] = 1, sign
            dirs.append(tuple(e))
    return dirs


def midpoint_convexity(h: Bifunction, tol: float = MIDPOINT_TOL) -> CheckResult:
    """
    v(n - e) + v(n + e) >= 2 v(n) - tol along rows, columns and diagonals

    A +inf middle node needs +inf on at least one side.
    """
    tensor = h.tensor()
    shape = tensor.shape
    worst = np.inf
    worst_index = None
    failures = 0
    for direction in _directions(len(shape)):
        if any(shape[k] < 3 for k, e in enumerate(direction) if e):
            continue
        prev_sl, mid_sl, next_sl, offset = [], [], [], []
        for k, e in enumerate(direction):
            n = shape[k]
            if e == 0:
                prev_sl.append(slice(None)); mid_sl.append(slice(None)); next_sl.append(slice(None))
                offset.append(0)
            elif e > 0:
                prev_sl.append(slice(0, n - 2)); mid_sl.append(slice(1, n - 1)); next_sl.append(slice(2, n))
                offset.append(1)
            else:
                prev_sl.append(slice(2, n)); mid_sl.append(slice(1, n - 1)); next_sl.append(slice(0, n - 2))
                offset.append(1)
        lhs = tensor[tuple(prev_sl)] + tensor[tuple(next_sl)]
        rhs = 2 * tensor[tuple(mid_sl)]
        with np.errstate(invalid='ignore'):
            ok = lhs >= rhs - tol
            margin = np.where(np.isfinite(lhs) & np.isfinite(rhs), lhs - rhs, np.inf)
        margin = np.where(ok, margin, -np.inf)
        failures += int(np.count_nonzero(~ok))
        local = int(np.argmin(margin))
        if margin.flat[local] < worst:
            worst = float(margin.flat[local])
            idx = np.unravel_index(local, margin.shape)
            worst_index = int(np.ravel_multi_index(tuple(i + o for i, o in zip(idx, offset)), shape))
    if worst_index is None:
        return CheckResult(passed=True, worst=0.0)
    return CheckResult(
        passed=failures == 0,
        worst=worst if np.isfinite(worst) else (0.0 if failures == 0 else -np.inf),
        worst_node=_node_dict(h, worst_index),
        count=failures,
    )


def membership_report(h: Bifunction, T: OperatorGraph, eq_tol: float = DEFAULT_EQ_TOL,
                      snap_tol: float = DEFAULT_SNAP_TOL) -> MembershipReport:
    """
    Node-level verdict on h in H(T)

    Checks midpoint convexity, h >= pi (margin -1e-9), h = pi on snapped graph
    nodes, and that the equality set {|h - pi| <= eq_tol} contains the graph and
    stays inside its grid monotone closure.
    """
    pi = pairing_matrix(h.xgrid.points(), h.sgrid.points())
    with np.errstate(invalid='ignore'):
        gap = h.values - pi

    convex = midpoint_convexity(h)

    worst = int(np.argmin(gap))
    minorizes = CheckResult(
        passed=bool(gap.flat[worst] >= -MINORANT_TOL),
        worst=float(gap.flat[worst]),
        worst_node=_node_dict(h, worst),
        count=int(np.count_nonzero(gap < -MINORANT_TOL)),
    )

    nodes, off_grid = snap_graph(T, h.xgrid, h.sgrid, snap_tol)
    if len(nodes):
        dev = np.abs(gap.flat[nodes])
        k = int(np.argmax(dev))
        on_T = CheckResult(
            passed=bool(dev[k] <= eq_tol),
            worst=float(dev[k]),
            worst_node=_node_dict(h, int(nodes[k])),
            count=int(np.count_nonzero(dev > eq_tol)),
        )
    else:
        on_T = CheckResult(passed=False, worst=np.inf, count=off_grid)

    equality = (np.abs(gap) <= eq_tol).ravel()
    graph = np.zeros(h.size, dtype=bool)
    graph[nodes] = True
    closure = monotone_closure(T, h.xgrid, h.sgrid).ravel() | graph
    extra = equality & ~closure
    missing = graph & ~equality
    bad = np.flatnonzero(extra | missing)
    eq_check = CheckResult(
        passed=bool(len(nodes)) and bad.size == 0,
        worst=float(bad.size),
        worst_node=_node_dict(h, int(bad[0])) if bad.size else None,
        count=int(bad.size),
    )

    report = MembershipReport(convex, minorizes, on_T, eq_check, eq_tol=eq_tol)
    logger.debug(f"Membership report: verdict={report.verdict} failures={report.failures()}")
    return report
