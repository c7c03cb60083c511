"""Ordered thread-pool map with a process-wide cap.

The cap comes from ``set_threads`` (the CLI's --threads), else the
HOFA_THREADS environment variable, else 1. Results keep input order, so
outputs do not depend on the thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

_threads: int | None = None


def set_threads(n: int | None) -> None:
    global _threads
    if n is not None and n < 1:
        raise ValueError("thread count must be at least 1")
    _threads = n


def threads() -> int:
    if _threads is not None:
        return _threads
    env = os.environ.get("HOFA_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def pmap(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    items = list(items)
    n = min(threads(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
