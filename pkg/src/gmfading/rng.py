"""Seeded random substreams and deterministic chunked parallel execution.

Work is split into fixed-size chunks; chunk ``k`` always draws from the
substream ``(seed, tag, k)``, so results do not depend on how many worker
threads execute the chunks.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

THREADS_ENV = "GMFADING_THREADS"


def as_seed(rng) -> int:
    """Normalise an int seed, a Generator or None to a 63-bit master seed."""
    if rng is None:
        return int(np.random.SeedSequence().entropy % (1 << 63))
    if isinstance(rng, (int, np.integer)):
        if rng < 0:
            raise ValueError("seed must be non-negative")
        return int(rng)
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(0, 1 << 63))
    raise TypeError(f"expected int seed or numpy Generator, got {type(rng).__name__}")


def substream(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(keys)))


def resolve_threads(threads=None) -> int:
    if threads is None:
        threads = os.environ.get(THREADS_ENV, "1")
    if isinstance(threads, str):
        if threads.strip().lower() == "auto":
            return os.cpu_count() or 1
        threads = int(threads)
    return max(1, int(threads))


def chunk_sizes(total: int, chunk: int) -> list[int]:
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])


def run_chunks(fn, total, chunk, seed, tag, threads=None):
    """Call ``fn(rng, size)`` for each chunk and concatenate results in order."""
    sizes = chunk_sizes(total, chunk)

    def task(k):
        return fn(substream(seed, tag, k), sizes[k])

    nthreads = resolve_threads(threads)
    if nthreads == 1 or len(sizes) == 1:
        parts = [task(k) for k in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            parts = list(pool.map(task, range(len(sizes))))
    return np.concatenate(parts, axis=0)
