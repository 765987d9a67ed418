"""Optional thread fan-out for chunked numpy work.

``ANOSOVLAB_THREADS`` caps the worker count (default 1). Results are always
returned in submission order, so reductions downstream do not depend on
scheduling.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def max_threads() -> int:
    raw = os.environ.get("ANOSOVLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def map_ordered(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    n = max_threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
