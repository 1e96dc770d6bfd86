"""
Order structure of H(T): the H_a(T) test, the hat construction, L(h),
fixed-point residuals and a heuristic search for small-residual members
"""

import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .conjugation import clconv, j_transform
from .exceptions import GridError, InvalidParameterError, PropertyViolationError
from .models.grid import Bifunction
from .models.operators import OperatorGraph
from .models.reports import ResidualReport
from .numerics import graph_mask, pairing_matrix
from .representations import membership_report, pointwise_max
from .utils.config import (
    DEFAULT_EQ_TOL, DEFAULT_MAX_ITERS, DEFAULT_SNAP_TOL, DEFAULT_STOP_TOL, HA_TOL,
)
from .utils.extreal import ge_with_inf

logger = logging.getLogger(__name__)


def _require_same_grids(h: Bifunction, g: Bifunction) -> None:
    if not h.same_grids(g):
        raise GridError("bifunctions live on different grid pairs")


def is_in_Ha(h: Bifunction, tol: float = HA_TOL) -> bool:
    """h >= Jh - tol at every node, +inf on the left always passing"""
    return bool(ge_with_inf(h.values, j_transform(h).values, tol).all())


def hat(h: Bifunction) -> Bifunction:
    """max(h, Jh), which lies in H_a(T) whenever h lies in H(T)"""
    return pointwise_max(h, j_transform(h))


def in_L(h: Bifunction, g: Bifunction, T: OperatorGraph, tol: float = HA_TOL) -> bool:
    """
    Whether g belongs to L(h) = {g in H(T) : h >= g >= Jg}

    Args:
        h: upper bound
        g: candidate member
        T: operator graph for the H(T) membership check
        tol: slack of both inequalities

    Returns:
        True iff both inequalities hold node-wise and g is a member of H(T)
    """
    _require_same_grids(h, g)
    if not ge_with_inf(h.values, g.values, tol).all():
        return False
    if not is_in_Ha(g, tol):
        return False
    return membership_report(g, T).verdict


def residual(h: Bifunction, iteration: Optional[int] = None) -> ResidualReport:
    """
    Fixed-point residual of h

    sup |h - Jh| over nodes where both are finite; nodes where exactly one of
    them is +inf are counted separately.
    """
    jh = j_transform(h).values
    h_inf = np.isinf(h.values)
    j_inf = np.isinf(jh)
    both = ~h_inf & ~j_inf
    mismatch = int(np.count_nonzero(h_inf ^ j_inf))

    worst_node = None
    sup = 0.0
    if both.any():
        diff = np.where(both, np.abs(h.values - np.where(both, jh, 0.0)), -1.0)
        k = int(np.argmax(diff))
        sup = float(diff.flat[k])
        x, s = h.node_coords(k)
        worst_node = {'x': x, 'xstar': s}
    in_ha = bool(ge_with_inf(h.values, jh, HA_TOL).all())
    return ResidualReport(sup, mismatch, in_ha, worst_node=worst_node, iteration=iteration)


def _converged(report: ResidualReport, stop_tol: float) -> bool:
    return report.sup_abs_diff <= stop_tol and report.finite_domain_mismatch == 0


def heuristic_fixed_point(h0: Bifunction, T: OperatorGraph, max_iters: int = DEFAULT_MAX_ITERS,
                          stop_tol: float = DEFAULT_STOP_TOL, eq_tol: float = DEFAULT_EQ_TOL,
                          snap_tol: float = DEFAULT_SNAP_TOL,
                          show_progress: bool = False) -> Tuple[Bifunction, List[ResidualReport]]:
    """
    Search for a small-residual member of H_a(T) starting from h0

    Iterates g <- clconv((g + Jg) / 2), then raises g to pi on snapped graph
    nodes. Every iterate must pass membership_report; a failing iterate aborts
    with PropertyViolationError carrying the iteration index. Stops once the
    residual drops to stop_tol with no finite-domain mismatch, or after
    max_iters iterations. No monotone decrease of the residual is claimed.
    """
    if max_iters < 0:
        raise InvalidParameterError(f"max_iters must be >= 0, got {max_iters}")
    report = membership_report(h0, T, eq_tol, snap_tol)
    if not report.verdict or not is_in_Ha(h0):
        raise PropertyViolationError(
            "starting point must be a member of H_a(T)", iteration=0, report=report.to_dict(),
        )

    mask = graph_mask(T, h0.xgrid, h0.sgrid, snap_tol)
    pi = pairing_matrix(h0.xgrid.points(), h0.sgrid.points())

    g = h0
    trace = [residual(g, iteration=0)]
    if _converged(trace[-1], stop_tol):
        logger.info("Starting point is already a fixed point")
        return g, trace

    for it in tqdm(range(1, max_iters + 1), desc="fixed-point search", disable=not show_progress):
        averaged = (g.values + j_transform(g).values) / 2
        values = clconv(g.with_values(averaged)).values
        values = np.where(mask, np.maximum(values, pi), values)
        g = g.with_values(values)

        report = membership_report(g, T, eq_tol, snap_tol)
        if not report.verdict:
            raise PropertyViolationError(
                f"iterate {it} left H(T): {', '.join(report.failures())}",
                iteration=it, report=report.to_dict(),
            )
        trace.append(residual(g, iteration=it))
        logger.debug(
            f"iteration {it}: sup_abs_diff={trace[-1].sup_abs_diff:.3e} "
            f"mismatch={trace[-1].finite_domain_mismatch}"
        )
        if _converged(trace[-1], stop_tol):
            break
    else:
        if max_iters:
            logger.warning(f"Fixed-point search hit max_iters={max_iters} without converging")
    return g, trace


def _bump(h: Bifunction, center: Tuple[Sequence[float], Sequence[float]],
          amplitude: float, radius: float) -> np.ndarray:
    """Nonnegative Gaussian bump over the node coordinates of h"""
    x, s = center
    c = np.concatenate([np.atleast_1d(x), np.atleast_1d(s)]).astype(np.float64)
    d2 = np.sum((h.node_points() - c) ** 2, axis=1)
    return (amplitude * np.exp(-d2 / (2 * radius ** 2))).reshape(h.shape)


def default_bumps(h: Bifunction, n_centers: int = 5, amplitude: float = 0.5) -> List[Dict[str, Any]]:
    """Bumps centred on evenly spaced finite nodes of h"""
    finite = np.flatnonzero(np.isfinite(h.values).ravel())
    picks = finite[np.linspace(0, len(finite) - 1, n_centers).round().astype(int)]
    radius = float(max(h.xgrid.steps.max(), h.sgrid.steps.max())) * 2
    bumps = []
    for k in picks:
        x, s = h.node_coords(int(k))
        bumps.append({'x': x, 'xstar': s, 'amplitude': amplitude, 'radius': radius})
    return bumps


def minimality_check(h0: Bifunction, T: OperatorGraph,
                     bumps: Optional[Sequence[Dict[str, Any]]] = None,
                     tol: float = DEFAULT_EQ_TOL) -> List[Dict[str, Any]]:
    """
    Easy direction of the fixed-point characterization on perturbations

    For a fixed point h0 every candidate g = clconv(h0 - bump) that lands in
    L(h0) must coincide with h0; a candidate in L(h0) that differs is an
    obstruction and raises PropertyViolationError.

    Returns:
        one dict per bump with its membership, in_L and equality outcome
    """
    start = residual(h0)
    if not _converged(start, HA_TOL):
        raise PropertyViolationError(
            f"minimality check needs a fixed point, residual {start.sup_abs_diff:.3e} "
            f"mismatch {start.finite_domain_mismatch}"
        )
    bumps = list(bumps) if bumps is not None else default_bumps(h0)
    outcomes = []
    for bump in bumps:
        lowered = h0.values - _bump(h0, (bump['x'], bump['xstar']), bump['amplitude'], bump['radius'])
        g = clconv(h0.with_values(lowered))
        member = membership_report(g, T).verdict
        in_l = member and in_L(h0, g, T)
        both = np.isfinite(g.values) & np.isfinite(h0.values)
        equal = bool(np.array_equal(np.isinf(g.values), np.isinf(h0.values))) and bool(
            np.all(np.abs(g.values[both] - h0.values[both]) <= tol)
        )
        outcome = {**bump, 'membership': member, 'in_L': in_l, 'equals_h0': equal}
        if in_l and not equal:
            raise PropertyViolationError("fixed point is not minimal in L(h0)", report=outcome)
        outcomes.append(outcome)
    logger.info(f"Minimality check: {len(outcomes)} candidates, "
                f"{sum(o['in_L'] for o in outcomes)} landed in L(h0)")
    return outcomes
