"""Deterministic bounded parallelism.

Results are collected in submission order, so the output is identical
for any worker count, including 1.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

from .errors import ConfigError

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> list[R]:
    """Apply ``fn`` over ``items`` with at most ``threads`` workers.

    Output order always matches input order; exceptions propagate from
    the failing item, earliest first.
    """
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")
    items = list(items)
    if threads == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, item) for item in items]
        return [f.result() for f in futures]
