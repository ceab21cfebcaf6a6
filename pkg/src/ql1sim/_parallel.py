"""Bounded thread fan-out honouring ``QL1SIM_THREADS``."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def thread_cap() -> int:
    raw = os.environ.get("QL1SIM_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def fan_out(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Map ``fn`` over ``items`` preserving order; threads only when allowed."""
    items = list(items)
    workers = min(thread_cap(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
