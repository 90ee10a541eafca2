"""Ordered parallel map used by the tau-scans and the run orchestrator.

Results are always returned in input order, so reductions over them do not
depend on the number of workers.
"""

from __future__ import annotations

import contextlib
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Iterator, TypeVar

T = TypeVar("T")
R = TypeVar("R")

_jobs = 1
_local = threading.local()


def get_jobs() -> int:
    return _jobs


@contextlib.contextmanager
def jobs(n: int) -> Iterator[None]:
    """Temporarily set the worker count for :func:`pmap`."""
    global _jobs
    if n < 1:
        raise ValueError(f"jobs must be >= 1, got {n}")
    old, _jobs = _jobs, int(n)
    try:
        yield
    finally:
        _jobs = old


def pmap(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    items = list(items)
    # nested maps run serially inside a worker
    if _jobs <= 1 or len(items) <= 1 or getattr(_local, "worker", False):
        return [fn(x) for x in items]

    def run(x):
        _local.worker = True
        return fn(x)

    with ThreadPoolExecutor(max_workers=_jobs) as pool:
        return list(pool.map(run, items))


def chunks(n: int, size: int) -> list[range]:
    return [range(i, min(i + size, n)) for i in range(0, n, size)]
