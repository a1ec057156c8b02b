"""Seeded, order-preserving parallel map.

Each task gets its own generator spawned from one master seed, and results come
back in task order, so output never depends on how many threads ran it.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

T = TypeVar("T")


def thread_count() -> int:
    raw = os.environ.get("DECOLAB_THREADS", "")
    if raw.strip():
        n = int(raw)
        if n < 1:
            raise ValueError("DECOLAB_THREADS must be a positive integer")
        return n
    return os.cpu_count() or 1


def spawn_generators(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def seeded_map(fn: Callable[[int, np.random.Generator], T], seed: int, n: int) -> list[T]:
    """[fn(i, rng_i) for i in range(n)], computed on up to thread_count() threads."""
    rngs = spawn_generators(seed, n)
    workers = min(thread_count(), n)
    if workers <= 1:
        return [fn(i, r) for i, r in enumerate(rngs)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n), rngs))
