"""Deterministic chunked execution, serial or across a process pool.

Chunk boundaries are fixed by sample index, never by worker count, and
chunk results are reduced in chunk order, so any worker count produces
bit-identical output.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def resolve_workers(workers: int | None = None) -> int:
    """Explicit value > THREADS env var > machine parallelism."""
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_chunked(fn, payloads, workers: int | None = None) -> list:
    """fn over payloads, results in payload order."""
    workers = resolve_workers(workers)
    if workers <= 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=min(workers, len(payloads))) as pool:
        return list(pool.map(fn, payloads))
