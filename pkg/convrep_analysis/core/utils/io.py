"""
Artifact I/O - sampled functions as CSV, reports as JSON / JSON lines
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Union

import numpy as np
import pandas as pd

from .config import CSV_FLOAT_FORMAT, JSON_INDENT
from .extreal import format_extreal, parse_extreal
from ..exceptions import SpecValidationError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy values and infinities to JSON-safe objects"""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return format_extreal(float(obj))
    if hasattr(obj, 'to_dict'):
        return to_jsonable(obj.to_dict())
    return obj


def save_json(data: Any, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(to_jsonable(data), f, ensure_ascii=False, indent=JSON_INDENT)
    logger.debug(f"Wrote {path}")
    return path


def load_json(path: PathLike) -> Dict[str, Any]:
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise SpecValidationError(str(path), "file not found") from e
    except json.JSONDecodeError as e:
        raise SpecValidationError(str(path), f"invalid JSON: {e}") from e


def save_jsonl(records: Iterable[Any], path: PathLike) -> Path:
    """One JSON object per line"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        for record in records:
            f.write(json.dumps(to_jsonable(record), ensure_ascii=False) + '\n')
    return path


def load_jsonl(path: PathLike) -> List[Dict[str, Any]]:
    with open(path, 'r', encoding='utf-8') as f:
        return [json.loads(line) for line in f if line.strip()]


def _coord_columns(prefix: str, dim: int) -> List[str]:
    return [prefix] if dim == 1 else [f"{prefix}{k + 1}" for k in range(dim)]


def function_frame(function) -> pd.DataFrame:
    """Long-format table of a GridFunction (x, value) or Bifunction (x, xstar, value)"""
    if hasattr(function, 'sgrid'):
        pts = function.node_points()
        d = function.dim
        columns = _coord_columns('x', d) + _coord_columns('xstar', d)
    else:
        pts = function.grid.points()
        columns = _coord_columns('x', function.grid.dim)
    df = pd.DataFrame(pts, columns=columns)
    df['value'] = np.asarray(function.values).ravel()
    return df


def save_function_csv(function, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    function_frame(function).to_csv(path, index=False, encoding='utf-8', float_format=CSV_FLOAT_FORMAT)
    logger.debug(f"Wrote {path}")
    return path


def load_function_values(path: PathLike) -> np.ndarray:
    """Value column of a function CSV, infinities restored"""
    df = pd.read_csv(path, encoding='utf-8', dtype={'value': str})
    return np.array([parse_extreal(v) for v in df['value']], dtype=np.float64)


def save_records_csv(records: List[Dict[str, Any]], path: PathLike) -> Path:
    """Flat records (residual traces, audit summaries) as CSV"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [
        {k: (v if not isinstance(v, float) or math.isfinite(v) else format_extreal(v)) for k, v in r.items()}
        for r in records
    ]
    pd.DataFrame(rows).to_csv(path, index=False, encoding='utf-8', float_format=CSV_FLOAT_FORMAT)
    return path
