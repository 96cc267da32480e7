"""Order-preserving worker-pool map.

Results come back in input order regardless of completion order, and the
caller reduces them serially, so parallel runs are byte-identical to
serial ones.
"""

from __future__ import annotations

import multiprocessing
import os


def default_jobs() -> int:
    """Default worker count: the TRAJSEG_JOBS env var, else 1."""
    raw = os.environ.get("TRAJSEG_JOBS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, items: list, jobs: int) -> list:
    """Map fn over items with a process pool; fn must be picklable."""
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunksize = max(1, len(items) // (jobs * 8))
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(processes=jobs) as pool:
        return pool.map(fn, items, chunksize=chunksize)
