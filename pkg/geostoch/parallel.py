"""Worker-count control and order-preserving parallel map."""

import os
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

from geostoch.errors import ConfigError

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "GEOSTOCH_THREADS"


def worker_count() -> int:
    """Worker cap from GEOSTOCH_THREADS, defaulting to the CPU count."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(THREADS_ENV, f"expected a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(THREADS_ENV, f"expected a positive integer, got {raw!r}")
    return n


def map_ordered(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    """
    Apply fn to every item and return results in input order.

    Reductions over the returned list are therefore independent of the worker
    count and of completion order.
    """
    items = list(items)
    workers = min(workers or worker_count(), max(len(items), 1))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
