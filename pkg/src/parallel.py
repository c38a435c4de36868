"""
Thread settings for exhaustive folds
A fold splits an index range into contiguous chunks, evaluates them on a thread pool
and sums the integer count arrays in chunk order
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)

_THREADS = 1


def configure_threads(threads: Optional[int]) -> int:
    """Set the worker count used by fold_ranges; None or values below 1 mean a single thread."""
    global _THREADS
    _THREADS = max(1, int(threads or 1))
    logger.debug("fold threads set to %d", _THREADS)
    return _THREADS


def current_threads() -> int:
    return _THREADS


def split_range(total: int, parts: int) -> List[Tuple[int, int]]:
    parts = max(1, min(parts, total))
    step, extra = divmod(total, parts)
    bounds, start = [], 0
    for i in range(parts):
        stop = start + step + (1 if i < extra else 0)
        bounds.append((start, stop))
        start = stop
    return bounds


def fold_ranges(total: int, work: Callable[[int, int], np.ndarray]) -> np.ndarray:
    """Sum work(start, stop) over a partition of range(total)."""
    if total <= 0:
        return work(0, 0)
    threads = current_threads()
    if threads == 1:
        return work(0, total)
    bounds = split_range(total, threads * 4)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda b: work(*b), bounds))
    acc = results[0].copy()
    for part in results[1:]:
        acc += part
    return acc
