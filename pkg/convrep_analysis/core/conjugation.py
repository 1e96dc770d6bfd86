"""
Discrete Fenchel-Legendre conjugation on grids

All sups run over grid nodes only; +inf samples drop out of every max and a
max over an empty set yields the -inf sentinel, which is flagged.
"""

import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import DimensionMismatchError, ImproperFunctionError, NonConvexSamplesError
from .models.grid import Bifunction, Grid, GridFunction, require_same_dim
from .models.reports import ConjugateResult
from .numerics import pairing, pairing_matrix, row_chunks
from .utils.config import CONVEXITY_TOL, HULL_TOL, PLATEAU_TOL
from .utils.extreal import has_sentinel
from .utils.hull import in_convex_hull

logger = logging.getLogger(__name__)

SampledFunction = Union[GridFunction, Bifunction]


def _require_proper(values: np.ndarray) -> None:
    if not np.isfinite(values).any():
        raise ImproperFunctionError()
    if has_sentinel(values):
        raise ImproperFunctionError("improper function: takes the -inf sentinel")


def _flag_sentinel(values: np.ndarray, what: str) -> bool:
    sentinel = has_sentinel(values)
    if sentinel:
        logger.warning(f"{what}: sup over an empty index set produced the -inf sentinel")
    return sentinel


# ---------------------------------------------------------------------------
# functions on a single grid
# ---------------------------------------------------------------------------

def conjugate_bruteforce(f: GridFunction, dual_grid: Optional[Grid] = None) -> ConjugateResult:
    """
    f*(s) = max over nodes x of <x, s> - f(x)

    Args:
        f: proper sampled function
        dual_grid: grid of the dual variable, defaults to f's grid

    Returns:
        ConjugateResult with the lowest-index maximizer of every dual node
    """
    dual_grid = dual_grid or f.grid
    require_same_dim(f.grid, dual_grid)
    _require_proper(f.values)

    pts = f.grid.points()
    duals = dual_grid.points()
    values = np.empty(dual_grid.size)
    argmax = np.empty(dual_grid.size, dtype=np.int64)
    for rows in row_chunks(dual_grid.size, f.grid.size):
        # +inf samples give -inf terms and never win
        terms = pairing_matrix(duals[rows], pts) - f.values[None, :]
        idx = np.argmax(terms, axis=1)
        argmax[rows] = idx
        values[rows] = terms[np.arange(len(idx)), idx]
    return ConjugateResult(GridFunction(dual_grid, values), argmax, has_sentinel=False)


def _midpoint_defects(values: np.ndarray) -> np.ndarray:
    return values[:-2] + values[2:] - 2 * values[1:-1]


def conjugate_fast(f: GridFunction, dual_grid: Optional[Grid] = None) -> ConjugateResult:
    """
    Linear-time Legendre transform of convex 1-D samples

    The maximizer of x_i*s - f_i is located by binary search over the sorted
    chord slopes; the neighbouring nodes are re-evaluated with the brute-force
    expression. Rows whose window touches a near-flat chord are rescanned in
    full, so both paths agree on values and tie-breaking.
    """
    dual_grid = dual_grid or f.grid
    if f.grid.dim != 1 or dual_grid.dim != 1:
        raise DimensionMismatchError("fast conjugate is 1-D only")
    v = f.values
    if not np.isfinite(v).all():
        raise NonConvexSamplesError("fast path requires convex samples (finite everywhere)")
    if f.grid.size >= 3:
        defects = _midpoint_defects(v)
        tol = CONVEXITY_TOL * max(1.0, float(np.abs(v).max()))
        bad = np.flatnonzero(defects < -tol)
        if bad.size:
            raise NonConvexSamplesError(index=int(bad[0]) + 1)

    x = f.grid.points()[:, 0]
    s = dual_grid.points()[:, 0]
    slopes = np.diff(v) / np.diff(x)
    # first chord with slope >= s starts at the lowest maximizer
    k = np.searchsorted(slopes, s, side='left')

    window = np.arange(-3, 4)
    cand = np.clip(k[:, None] + window[None, :], 0, len(x) - 1)
    terms = s[:, None] * x[cand] - v[cand]
    # clipped duplicates share a value; lowest index wins ties
    order = np.argsort(cand, axis=1, kind='stable')
    cand = np.take_along_axis(cand, order, axis=1)
    terms = np.take_along_axis(terms, order, axis=1)
    best = np.argmax(terms, axis=1)
    rows = np.arange(len(s))
    values = terms[rows, best]
    argmax = cand[rows, best].astype(np.int64)

    # a maximum on the window edge may continue as a plateau beyond it, and a
    # near-flat chord next to the window may hide an exact tie further out
    last = len(x) - 1
    edge = ((best == 0) & (cand[:, 0] > 0)) | ((best == cand.shape[1] - 1) & (cand[:, -1] < last))
    if slopes.size:
        slope_tol = PLATEAU_TOL * max(1.0, float(np.abs(slopes).max()))
        left, right = cand[:, 0], cand[:, -1]
        edge |= (left > 0) & (slopes[np.maximum(left - 1, 0)] >= s - slope_tol)
        edge |= (right < last) & (slopes[np.minimum(right, last - 1)] <= s + slope_tol)
    for r in np.flatnonzero(edge):
        full = s[r] * x - v
        k_best = int(np.argmax(full))
        values[r], argmax[r] = full[k_best], k_best
    return ConjugateResult(GridFunction(dual_grid, values), argmax, has_sentinel=False)


# ---------------------------------------------------------------------------
# functions on a product grid
# ---------------------------------------------------------------------------

def _coupled_sup(H: np.ndarray, L: np.ndarray, R: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    out[a, b] = max over (i, j) of L[a, i] + R[b, j] - H[i, j]

    Evaluated in two stages (over j, then over i). The recorded maximizer is the
    lowest row-major flat index i * H.shape[1] + j.
    """
    n_i, n_j = H.shape
    n_a, n_b = L.shape[0], R.shape[0]

    # stage 1: G[b, i] = max_j R[b, j] - H[i, j]
    G = np.empty((n_b, n_i))
    arg_j = np.empty((n_b, n_i), dtype=np.int64)
    for rows in row_chunks(n_b, n_i * n_j):
        terms = R[rows, None, :] - H[None, :, :]
        idx = np.argmax(terms, axis=2)
        arg_j[rows] = idx
        G[rows] = np.take_along_axis(terms, idx[:, :, None], axis=2)[:, :, 0]

    # stage 2: out[a, b] = max_i L[a, i] + G[b, i]
    out = np.empty((n_a, n_b))
    flat = np.empty((n_a, n_b), dtype=np.int64)
    b_index = np.arange(n_b)
    for rows in row_chunks(n_a, n_b * n_i):
        terms = L[rows, None, :] + G[None, :, :]
        idx = np.argmax(terms, axis=2)
        out[rows] = np.take_along_axis(terms, idx[:, :, None], axis=2)[:, :, 0]
        flat[rows] = idx * n_j + arg_j[b_index[None, :], idx]
    return out, flat


def conjugate_bifunction(h: Bifunction, ugrid: Optional[Grid] = None,
                         vgrid: Optional[Grid] = None) -> ConjugateResult:
    """
    h*(u, v) = max over nodes (y, y*) of <u, y> + <v, y*> - h(y, y*)

    The dual of the x-part lives on ugrid (default: h.sgrid, the X* grid) and
    the dual of the x*-part on vgrid (default: h.xgrid).
    """
    ugrid = ugrid or h.sgrid
    vgrid = vgrid or h.xgrid
    require_same_dim(h.xgrid, ugrid)
    require_same_dim(h.sgrid, vgrid)
    _require_proper(h.values)

    L = pairing_matrix(ugrid.points(), h.xgrid.points())
    R = pairing_matrix(vgrid.points(), h.sgrid.points())
    values, argmax = _coupled_sup(h.values, L, R)
    sentinel = _flag_sentinel(values, "conjugate")
    return ConjugateResult(Bifunction(ugrid, vgrid, values), argmax, has_sentinel=sentinel)


def phi_coupling(p: Tuple[Sequence[float], Sequence[float]],
                 q: Tuple[Sequence[float], Sequence[float]]) -> float:
    """Phi((x, x*), (y, y*)) = <x, y*> + <y, x*>"""
    (x, xstar), (y, ystar) = p, q
    return pairing(x, ystar) + pairing(y, xstar)


def j_transform_result(h: Bifunction) -> ConjugateResult:
    """
    Jh(x, x*) = max over nodes (y, y*) of Phi((x, x*), (y, y*)) - h(y, y*)

    Output grids equal the input grids; argmax_index holds, per output node,
    the flat index of the maximizing (y, y*) node.
    """
    _require_proper(h.values)
    # L pairs the output x* with y, R pairs the output x with y*
    L = pairing_matrix(h.sgrid.points(), h.xgrid.points())
    R = pairing_matrix(h.xgrid.points(), h.sgrid.points())
    values, argmax = _coupled_sup(h.values, L, R)
    sentinel = _flag_sentinel(values, "J-transform")
    return ConjugateResult(
        Bifunction(h.xgrid, h.sgrid, values.T),
        np.ascontiguousarray(argmax.T),
        has_sentinel=sentinel,
    )


def j_transform(h: Bifunction) -> Bifunction:
    return j_transform_result(h).function


# ---------------------------------------------------------------------------
# closed convex hull
# ---------------------------------------------------------------------------

def hull_mask(h: SampledFunction) -> np.ndarray:
    """
    Nodes outside the convex hull of the finite domain of h

    On these nodes clconv(h) is +inf while the bounded-grid biconjugate (and
    J^2 h) stays finite; elsewhere the two coincide.
    """
    if isinstance(h, GridFunction):
        pts = h.grid.points()
        finite = np.isfinite(h.values)
        return ~in_convex_hull(pts[finite], pts, tol=HULL_TOL)
    pts = h.node_points()
    finite = np.isfinite(h.values).ravel()
    return ~in_convex_hull(pts[finite], pts, tol=HULL_TOL).reshape(h.shape)


def biconjugate(h: SampledFunction) -> SampledFunction:
    """Double conjugate on the same grid pair, finite everywhere"""
    if isinstance(h, GridFunction):
        first = conjugate_bruteforce(h).function
        return conjugate_bruteforce(first, h.grid).function
    first = conjugate_bifunction(h).function
    return conjugate_bifunction(first, h.xgrid, h.sgrid).function


def clconv(h: SampledFunction) -> SampledFunction:
    """
    Closed convex hull of sampled h

    Double conjugate on the same grid pair, set to +inf outside the convex hull
    of the finite domain (no convex combination of samples reaches there).
    """
    _require_proper(h.values)
    bi = biconjugate(h)
    outside = hull_mask(h)
    values = np.where(outside, np.inf, bi.values)
    # clconv never exceeds h
    values = np.minimum(values, h.values)
    if isinstance(h, GridFunction):
        return GridFunction(h.grid, values)
    return Bifunction(h.xgrid, h.sgrid, values)
