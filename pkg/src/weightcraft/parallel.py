"""Deterministic RNG streams and an order-preserving thread map.

Every random task draws from ``numpy.random.default_rng([seed, tag, *index])``
(a PCG64 generator seeded through ``SeedSequence``), so results depend only on
the seed and the task key, never on scheduling or thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

# Stream tags; one per consumer so no two purposes share a stream.
TAG_DATAGEN = 1
TAG_BOOTSTRAP = 2
TAG_NITEMS = 3
TAG_MONTE_CARLO = 4
TAG_BOOT_CI = 5


def stream(seed: int, tag: int, *index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(tag), *(int(i) for i in index)])


def default_threads() -> int:
    return os.cpu_count() or 1


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    items = list(items)
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
