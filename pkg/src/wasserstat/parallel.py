"""Deterministic draw loops with optional thread workers.

Every Monte Carlo draw gets its own counter-based random stream keyed by
(seed, draw index), so results are identical for any worker count and any
scheduling order. Workers only help when the per-draw work releases the
GIL (the compiled solver kernels do).
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for one draw of one experiment."""
    key = np.array([np.uint64(seed), np.uint64(index)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)


def derive_seed(seed: int, *tags: int) -> int:
    """Well-mixed child seed for a tagged sub-experiment.

    Keeps independently seeded stages of one run (measure generation,
    finite-sample draws, limit draws) from colliding in the (seed, index)
    substream space.
    """
    state = np.random.SeedSequence([int(seed), *[int(t) for t in tags]])
    return int(state.generate_state(1, dtype=np.uint64)[0])


def map_draws(
    draw: Callable[[np.random.Generator, int], float],
    M: int,
    seed: int,
    workers: int = 1,
) -> np.ndarray:
    """Evaluate draw(rng, i) for i in range(M) into a float array.

    The draw function must derive all randomness from the generator it is
    handed; then the output does not depend on the worker count.
    """
    if M < 0:
        raise ValueError("draw count must be nonnegative")
    out = np.empty(M, dtype=np.float64)
    if M == 0:
        return out
    workers = max(1, min(int(workers), M))
    if workers == 1:
        for i in range(M):
            out[i] = draw(substream(seed, i), i)
        return out

    bounds = np.linspace(0, M, workers + 1, dtype=np.int64)

    def run_chunk(k: int):
        for i in range(bounds[k], bounds[k + 1]):
            out[i] = draw(substream(seed, i), i)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(run_chunk, range(workers)))
    return out
