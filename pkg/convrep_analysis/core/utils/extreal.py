"""
Extended-real helpers

Samples are stored as float64: finite values, +inf, and -inf only as the
sentinel produced by a sup over an empty index set.
"""

import logging
import math
from typing import Union

import numpy as np

from .config import INF_LITERAL, NEG_INF_LITERAL
from ..exceptions import ConvRepError

logger = logging.getLogger(__name__)

ExtRealLike = Union[float, int, str]


def validate_samples(values: np.ndarray, allow_sentinel: bool = False) -> np.ndarray:
    """Return values as float64, rejecting NaN and (unless allowed) -inf"""
    arr = np.asarray(values, dtype=np.float64)
    if np.isnan(arr).any():
        raise ConvRepError("samples contain NaN")
    if not allow_sentinel and np.isneginf(arr).any():
        raise ConvRepError("-inf is only allowed as the empty-sup sentinel")
    return arr


def has_sentinel(values: np.ndarray) -> bool:
    return bool(np.isneginf(values).any())


def is_proper(values: np.ndarray) -> bool:
    """At least one finite sample and no -inf"""
    return bool(np.isfinite(values).any()) and not has_sentinel(values)


def format_extreal(value: float) -> Union[float, str]:
    """JSON-friendly form: finite floats stay floats, infinities become literals"""
    if math.isinf(value):
        return INF_LITERAL if value > 0 else NEG_INF_LITERAL
    return float(value)


def parse_extreal(value: ExtRealLike) -> float:
    if isinstance(value, str):
        text = value.strip().lower()
        if text in (INF_LITERAL, '+inf', 'infinity', '+infinity'):
            return math.inf
        if text in (NEG_INF_LITERAL, '-infinity'):
            logger.warning("Parsed the -inf sentinel from input")
            return -math.inf
        return float(text)
    result = float(value)
    if math.isnan(result):
        raise ConvRepError("NaN is not an extended real")
    return result


def ge_with_inf(lhs: np.ndarray, rhs: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """lhs >= rhs - tol elementwise; +inf on the left always passes"""
    lhs = np.asarray(lhs, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    with np.errstate(invalid='ignore'):
        ok = lhs >= rhs - tol
    return ok | np.isposinf(lhs)


def common_finite(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.isfinite(a) & np.isfinite(b)
