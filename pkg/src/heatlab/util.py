"""Small shared helpers: time grids, compensated sums, deterministic CSV."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .errors import EmptyGrid


def default_time_grid(t0: float = 1.0, ratio: float = 0.5,
                      points: int = 20) -> np.ndarray:
    """Geometric grid t_k = t0 * ratio^k, k = 0..points-1 (decreasing)."""
    if points <= 0:
        raise EmptyGrid("time grid needs at least one point")
    if t0 <= 0 or not 0 < ratio < 1:
        raise ValueError("need t0 > 0 and 0 < ratio < 1")
    return t0 * ratio ** np.arange(points)


def check_time_grid(t_grid) -> np.ndarray:
    """Validate a strictly decreasing positive grid and return it as an array."""
    arr = np.asarray(t_grid, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise EmptyGrid("empty time grid")
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise ValueError("time grid must be positive and finite")
    if arr.size > 1 and not np.all(np.diff(arr) < 0):
        raise ValueError("time grid must be strictly decreasing")
    return arr


def kahan_sum(values) -> float:
    """Compensated (Kahan) sum; order-stable accumulation of worker results."""
    total = 0.0
    comp = 0.0
    for v in values:
        y = float(v) - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def fmt(value) -> str:
    """Canonical text form for CSV cells: shortest round-trip for floats."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, header, rows) -> Path:
    """Write rows with a fixed '\\n' terminator so output bytes are stable."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return p


def parallel_map(fn, items, threads: int = 1) -> list:
    """Order-preserving map, optionally over a thread pool.

    Each call must be pure; results are collected by position so the output
    does not depend on scheduling.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
