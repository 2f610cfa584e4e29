"""Seeded random streams and the shared worker pool."""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import numpy as np

from constants import DEFAULT_SEED, THREADS_ENV_VAR

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def make_rng(seed: Optional[int] = None) -> np.random.Generator:
    """Return a Philox-backed generator (counter based, so streams split cleanly)."""
    return np.random.Generator(np.random.Philox(DEFAULT_SEED if seed is None else seed))


def spawn_rngs(seed: Optional[int], count: int) -> List[np.random.Generator]:
    """Derive ``count`` independent generators from one master seed.

    Stream ``i`` depends only on ``(seed, i)``, never on how many workers
    consume the streams or in which order.
    """
    root = np.random.SeedSequence(DEFAULT_SEED if seed is None else seed)
    return [np.random.Generator(np.random.Philox(child)) for child in root.spawn(count)]


def thread_count() -> int:
    """Pool size from ROBUST_T_THREADS, falling back to the CPU count."""
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw:
        try:
            value = int(raw)
            if value >= 1:
                return value
        except ValueError:
            pass
        logger.warning("Ignoring invalid %s=%r", THREADS_ENV_VAR, raw)
    return os.cpu_count() or 1


def parallel_map(func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """Map ``func`` over ``items`` on a thread pool, keeping submission order."""
    work = list(items)
    workers = threads if threads is not None else thread_count()
    if workers <= 1 or len(work) <= 1:
        return [func(item) for item in work]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, work))
