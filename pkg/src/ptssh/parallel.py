"""Ordered fan-out of independent grid cells."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_VAR = "PTSSH_THREADS"


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit value, else ``$PTSSH_THREADS``, else 1; 0 means all CPUs."""
    if workers is None:
        raw = os.environ.get(ENV_VAR, "").strip()
        workers = int(raw) if raw else 1
    if workers < 0:
        raise ValueError(f"worker count must be >= 0, got {workers}")
    if workers == 0:
        workers = os.cpu_count() or 1
    return workers


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    """``[fn(x) for x in items]``, possibly across processes; order is preserved."""
    seq: Sequence[T] = list(items)
    n = min(resolve_workers(workers), len(seq))
    if n <= 1:
        return [fn(x) for x in seq]
    chunk = max(1, len(seq) // (4 * n))
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, seq, chunksize=chunk))
