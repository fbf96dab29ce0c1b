"""Process-wide knobs (worker count for data-parallel sweeps)."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

WORKERS = 1


def set_workers(n: int):
    global WORKERS
    WORKERS = max(1, int(n))


def pool_map(fn, items):
    """Map preserving order; threads help when the compiled kernels release
    the GIL, and the reduction stays deterministic either way."""
    items = list(items)
    if WORKERS <= 1 or len(items) < 4:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=WORKERS) as ex:
        return list(ex.map(fn, items))
