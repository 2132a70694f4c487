"""Deterministic random substreams and an order-preserving worker map.

Every random quantity is drawn from a stream keyed by ``(seed, index, ...)``
so the values never depend on how work is split across workers.  Work is cut
into fixed-size chunks before it is handed to the pool; results are reassembled
in chunk order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

CHUNK = 256


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``key`` under the master ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def derive_seed(seed: int, *key: int) -> int:
    """A 63-bit integer seed for a sub-task, stable across runs."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(2, np.uint64)[0] >> np.uint64(1))


def chunk_ranges(total: int, chunk: int = CHUNK) -> list[range]:
    return [range(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]


def ordered_map(fn: Callable[[T], object], items: Sequence[T], threads: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally on a thread pool; order preserved."""
    threads = max(1, int(threads or 1))
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def fresh_seed() -> int:
    return int(np.random.SeedSequence().generate_state(2, np.uint64)[0] >> np.uint64(1))
