"""Deterministic chunked Monte Carlo helper.

Work is split into a fixed number of chunks with seeds spawned from the base
seed, independent of the worker count; merging in chunk order makes results
bit-identical for any ``workers`` value.
"""

from __future__ import annotations

from multiprocessing import get_context

import numpy as np

N_CHUNKS = 16


def chunk_seeds(seed: int, n_chunks: int = N_CHUNKS) -> list:
    return [np.random.SeedSequence((seed, i)) for i in range(n_chunks)]


def chunk_sizes(total: int, n_chunks: int = N_CHUNKS) -> list:
    base, rem = divmod(total, n_chunks)
    return [base + (1 if i < rem else 0) for i in range(n_chunks)]


def run_chunked(worker, total: int, seed: int, workers: int = 1, n_chunks: int = N_CHUNKS):
    """Evaluate ``worker(size, seed_sequence)`` over fixed chunks and return
    the list of chunk results in order.

    The chunk layout depends only on (total, seed, n_chunks), never on
    ``workers``."""
    tasks = [
        (size, ss)
        for size, ss in zip(chunk_sizes(total, n_chunks), chunk_seeds(seed, n_chunks))
        if size > 0
    ]
    if workers <= 1:
        return [worker(size, ss) for size, ss in tasks]
    with get_context("spawn").Pool(processes=workers) as pool:
        return pool.starmap(worker, tasks)
