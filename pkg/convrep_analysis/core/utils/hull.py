"""
Convex hull membership for finite domains of sampled functions
"""

import logging

import numpy as np
from scipy.spatial import ConvexHull

from .config import HULL_TOL

logger = logging.getLogger(__name__)


def _affine_frame(points: np.ndarray, tol: float):
    """Origin and orthonormal basis of the affine hull of points"""
    origin = points.mean(axis=0)
    centered = points - origin
    if not np.any(centered):
        return origin, np.zeros((0, points.shape[1]))
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    scale = max(1.0, float(np.abs(points).max()))
    rank = int(np.sum(singular > tol * scale * max(1, len(points))))
    return origin, vt[:rank]


def in_convex_hull(points: np.ndarray, queries: np.ndarray, tol: float = HULL_TOL) -> np.ndarray:
    """
    Boolean mask of queries lying in the convex hull of points

    Degenerate point sets (a single point, collinear or coplanar samples) are
    reduced to their affine hull before the facet test.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if len(points) == 0:
        return np.zeros(len(queries), dtype=bool)

    origin, basis = _affine_frame(points, tol)
    scale = max(1.0, float(np.abs(points).max()))

    rel_q = queries - origin
    coords_q = rel_q @ basis.T
    residual = rel_q - coords_q @ basis
    on_affine = np.linalg.norm(residual, axis=1) <= tol * scale * 10
    rank = basis.shape[0]

    if rank == 0:
        return on_affine

    coords_p = (points - origin) @ basis.T
    if rank == 1:
        lo, hi = coords_p[:, 0].min(), coords_p[:, 0].max()
        inside = (coords_q[:, 0] >= lo - tol * scale) & (coords_q[:, 0] <= hi + tol * scale)
        return on_affine & inside

    hull = ConvexHull(coords_p)
    # equations: normal . z + offset <= 0 inside
    slack = coords_q @ hull.equations[:, :-1].T + hull.equations[:, -1]
    inside = np.all(slack <= tol * scale * 10, axis=1)
    return on_affine & inside
