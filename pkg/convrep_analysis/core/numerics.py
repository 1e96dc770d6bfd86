"""
Numerics core - duality product, indicator of a graph, sampling of
closed-form functions and monotonicity checks
"""

import logging
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from .exceptions import DimensionMismatchError, GraphOffGridError, InvalidParameterError
from .models.functions import ClosedFormConvexFunction
from .models.grid import Bifunction, Grid, GridFunction, require_same_dim
from .models.operators import MonotoneViolation, OperatorGraph
from .utils.config import CHUNK_ELEMENTS, DEFAULT_SNAP_TOL

logger = logging.getLogger(__name__)


def row_chunks(n_rows: int, row_elements: int, budget: int = CHUNK_ELEMENTS) -> Iterator[slice]:
    """Row slices whose broadcast work arrays stay below budget elements"""
    step = max(1, budget // max(1, row_elements))
    for start in range(0, n_rows, step):
        yield slice(start, min(n_rows, start + step))


def pairing(x: Sequence[float], xstar: Sequence[float]) -> float:
    """<x, x*> = sum_i x_i * x*_i"""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    xstar = np.atleast_1d(np.asarray(xstar, dtype=np.float64))
    if x.shape != xstar.shape:
        raise DimensionMismatchError(f"pairing of dimension {x.size} with {xstar.size}")
    return float(np.dot(x, xstar))


def pairing_matrix(points: np.ndarray, duals: np.ndarray) -> np.ndarray:
    """All pairings <points[i], duals[j]>"""
    if points.shape[1] != duals.shape[1]:
        raise DimensionMismatchError(f"pairing of dimension {points.shape[1]} with {duals.shape[1]}")
    return points @ duals.T


def pi_bifunction(xgrid: Grid, sgrid: Grid) -> Bifunction:
    """The duality product pi(x, s) = <x, s> sampled on xgrid x sgrid"""
    require_same_dim(xgrid, sgrid)
    return Bifunction(xgrid, sgrid, pairing_matrix(xgrid.points(), sgrid.points()))


def snap_graph(T: OperatorGraph, xgrid: Grid, sgrid: Grid,
               snap_tol: float = DEFAULT_SNAP_TOL) -> Tuple[np.ndarray, int]:
    """
    Flat Bifunction node indices of graph points that land on the grid

    Returns:
        (sorted unique node indices, number of graph points off the grid)
    """
    if snap_tol < 0:
        raise InvalidParameterError(f"snap_tol must be >= 0, got {snap_tol}")
    require_same_dim(xgrid, sgrid)
    if T.dim != xgrid.dim:
        raise DimensionMismatchError(f"{T.dim}-D graph on {xgrid.dim}-D grids")
    nodes = []
    off_grid = 0
    for x, s in T.pairs():
        i = xgrid.snap(x, snap_tol)
        j = sgrid.snap(s, snap_tol)
        if i is None or j is None:
            off_grid += 1
            continue
        nodes.append(i * sgrid.size + j)
    return np.unique(np.array(nodes, dtype=np.int64)), off_grid


def graph_mask(T: OperatorGraph, xgrid: Grid, sgrid: Grid,
               snap_tol: float = DEFAULT_SNAP_TOL, strict: bool = False) -> np.ndarray:
    """Boolean (xgrid.size, sgrid.size) mask of snapped graph nodes"""
    nodes, off_grid = snap_graph(T, xgrid, sgrid, snap_tol)
    if len(nodes) == 0 or (strict and off_grid):
        raise GraphOffGridError(off_grid=off_grid)
    if off_grid:
        logger.warning(f"{off_grid} of {len(T)} graph points are off the grid and were dropped")
    mask = np.zeros(xgrid.size * sgrid.size, dtype=bool)
    mask[nodes] = True
    return mask.reshape(xgrid.size, sgrid.size)


def indicator_of_graph(T: OperatorGraph, xgrid: Grid, sgrid: Grid,
                       snap_tol: float = DEFAULT_SNAP_TOL) -> Bifunction:
    """delta_T: 0 on snapped graph nodes, +inf elsewhere"""
    mask = graph_mask(T, xgrid, sgrid, snap_tol)
    return Bifunction(xgrid, sgrid, np.where(mask, 0.0, np.inf))


def sample_function(f: ClosedFormConvexFunction, grid: Grid) -> GridFunction:
    """Pointwise evaluation of f on grid nodes"""
    return f.sample(grid)


def subdifferential_graph(f: ClosedFormConvexFunction, xgrid: Grid, sgrid: Grid = None) -> OperatorGraph:
    """Analytically sampled graph of the subdifferential of f"""
    return OperatorGraph.from_pairs(f.subgradient_pairs(xgrid, sgrid or xgrid))


def monotonicity_products(T: OperatorGraph) -> np.ndarray:
    """Matrix of <x_i - x_j, x*_i - x*_j> over all graph pairs"""
    n = len(T)
    out = np.empty((n, n))
    for rows in row_chunks(n, n * T.dim):
        dx = T.x[rows, None, :] - T.x[None, :, :]
        ds = T.xstar[rows, None, :] - T.xstar[None, :, :]
        out[rows] = np.sum(dx * ds, axis=2)
    return out


def check_monotone(T: OperatorGraph) -> List[MonotoneViolation]:
    """All unordered pairs with negative monotonicity product; empty iff monotone"""
    products = monotonicity_products(T)
    i, j = np.nonzero(np.triu(products < 0, k=1))
    violations = [MonotoneViolation(int(a), int(b), float(products[a, b])) for a, b in zip(i, j)]
    if violations:
        logger.debug(f"Graph of {len(T)} points has {len(violations)} monotonicity violations")
    return violations


def graph_margin(T: OperatorGraph, x: np.ndarray, s: np.ndarray) -> np.ndarray:
    """min over the graph of <x - y, s - y*> for each row pair (x[k], s[k])"""
    x = np.asarray(x, dtype=np.float64).reshape(len(x), -1)
    s = np.asarray(s, dtype=np.float64).reshape(len(s), -1)
    if x.shape != s.shape or x.shape[1] != T.dim:
        raise DimensionMismatchError(f"margin rows {x.shape} / {s.shape} against a {T.dim}-D graph")
    out = np.empty(len(x))
    for rows in row_chunks(len(x), len(T) * T.dim):
        dx = x[rows, None, :] - T.x[None, :, :]
        ds = s[rows, None, :] - T.xstar[None, :, :]
        out[rows] = np.min(np.sum(dx * ds, axis=2), axis=1)
    return out
