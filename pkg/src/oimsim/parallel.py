"""Deterministic block-parallel execution.

Exhaustive sweeps are split into contiguous index blocks; blocks may run
on a thread pool (the native kernels release the GIL) but results are
always merged in block order, so the output is identical for any thread
count.
"""

from __future__ import annotations

import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from itertools import islice


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        return os.cpu_count() or 1
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    return threads


def iter_blocks(start: int, stop: int, block: int):
    lo = start
    while lo < stop:
        hi = min(lo + block, stop)
        yield lo, hi
        lo = hi


def map_blocks(fn, blocks, threads: int | None):
    """Apply fn to each (lo, hi) block; results in block order."""
    blocks = list(blocks)
    nthreads = min(resolve_threads(threads), max(len(blocks), 1))
    if nthreads <= 1 or len(blocks) <= 1:
        return [fn(lo, hi) for lo, hi in blocks]
    with ThreadPoolExecutor(max_workers=nthreads) as ex:
        return list(ex.map(lambda b: fn(*b), blocks))


def imap_blocks(fn, blocks, threads: int | None):
    """Like map_blocks but lazy, with a bounded prefetch window.

    Keeps at most nthreads+1 blocks in flight so streaming consumers
    never hold the whole sweep in memory. Yield order is block order.
    """
    blocks = list(blocks)
    nthreads = min(resolve_threads(threads), max(len(blocks), 1))
    if nthreads <= 1 or len(blocks) <= 1:
        for lo, hi in blocks:
            yield fn(lo, hi)
        return
    with ThreadPoolExecutor(max_workers=nthreads) as ex:
        it = iter(blocks)
        pending = deque(ex.submit(fn, *b) for b in islice(it, nthreads + 1))
        for b in it:
            done = pending.popleft()
            pending.append(ex.submit(fn, *b))
            yield done.result()
        while pending:
            yield pending.popleft().result()
