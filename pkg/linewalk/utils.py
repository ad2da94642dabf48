"""
Utility functions for linewalk.

Author: linewalk developers
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Optional, TypeVar, Union

import numpy as np
import pandas as pd

T = TypeVar("T")


def partition(n: int, size: int) -> list[tuple[int, int]]:
    """Split ``range(n)`` into consecutive ``(start, stop)`` batches of ``size``."""
    if size < 1:
        raise ValueError(f"Batch size must be positive, got {size}")
    return [(lo, min(lo + size, n)) for lo in range(0, n, size)]


def map_batches(
    fn: Callable[[tuple[int, int]], T],
    n: int,
    size: int,
    workers: int = 1,
) -> list[T]:
    """Apply ``fn`` to each batch of ``range(n)`` and return results in batch order.

    The partition depends only on ``n`` and ``size``, so combining the returned
    list left to right gives the same result for any number of workers.
    """
    batches = partition(n, size)
    if workers <= 1 or len(batches) <= 1:
        return [fn(b) for b in batches]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, batches))


def canonical_json(obj: Any) -> str:
    """Deterministic JSON text (sorted keys, no extra whitespace)."""
    return json.dumps(make_serializable(obj), sort_keys=True, separators=(",", ":"))


def git_blob_hash(text: str) -> str:
    """Content hash as git computes it for a blob (SHA-1 of ``blob <len>\\0<data>``)."""
    data = text.encode("utf-8")
    h = hashlib.sha1()
    h.update(b"blob %d\0" % len(data))
    h.update(data)
    return h.hexdigest()


def write_csv(
    frame: pd.DataFrame,
    path: Union[str, Path],
    header: Optional[dict[str, str]] = None,
) -> Path:
    """Write ``frame`` as CSV preceded by ``# key: value`` provenance lines.

    Floats are written with ``repr`` precision so re-reading is lossless.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        for key, value in (header or {}).items():
            f.write(f"# {key}: {value}\n")
        frame.to_csv(f, index=False, float_format="%.17g", lineterminator="\n")
    return path


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    """Read a CSV written by :func:`write_csv`, skipping provenance lines."""
    return pd.read_csv(path, comment="#")


def make_serializable(obj):
    """Recursively convert numpy/Fraction values to JSON-safe Python primitives."""
    if isinstance(obj, dict):
        return {str(k): make_serializable(v) for k, v in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [make_serializable(x) for x in obj]
    elif isinstance(obj, Fraction):
        return str(obj)
    elif isinstance(obj, (np.integer,)):
        return int(obj)
    elif isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else str(value)
    elif isinstance(obj, np.bool_):
        return bool(obj)
    elif isinstance(obj, np.ndarray):
        return make_serializable(obj.tolist())
    return obj
