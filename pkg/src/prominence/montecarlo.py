"""Seeded, sharded Monte Carlo driver.

Draws are split into fixed-size shards; shard ``j`` owns the stream
``Philox(SeedSequence([seed, j]))``. Shard results are reduced in shard
order, so an estimate depends only on ``(seed, n)`` and never on how many
workers evaluated it.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

from .errors import DomainError

SHARD_SIZE = 1 << 16

T = TypeVar("T")


def default_workers() -> int:
    try:
        return max(len(os.sched_getaffinity(0)), 1)
    except AttributeError:
        return os.cpu_count() or 1


def shard_rng(seed: int, shard: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(shard)])))


def shard_sizes(n: int, shard_size: int = SHARD_SIZE) -> list[int]:
    full, rest = divmod(int(n), shard_size)
    return [shard_size] * full + ([rest] if rest else [])


def run_sharded(fn: Callable[[np.random.Generator, int], T], n: int, seed: int | None,
                workers: int | None = None) -> list[T]:
    """Evaluate ``fn(rng, size)`` on every shard; results come back in shard order."""
    if seed is None:
        raise DomainError("a seed is required for Monte Carlo estimates")
    if int(n) < 1:
        raise DomainError("sample count n must be at least 1")
    sizes = shard_sizes(n)
    jobs = [(j, k) for j, k in enumerate(sizes)]
    workers = default_workers() if workers is None else max(int(workers), 1)
    if workers == 1 or len(jobs) == 1:
        return [fn(shard_rng(seed, j), k) for j, k in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(shard_rng(seed, job[0]), job[1]), jobs))


def mean_and_stderr(total: float, total_sq: float, n: int) -> tuple[float, float]:
    """Sample mean and its standard error from running sums."""
    mean = total / n
    if n < 2:
        return mean, 0.0
    var = max(total_sq / n - mean * mean, 0.0) * n / (n - 1)
    return mean, float(np.sqrt(var / n))
