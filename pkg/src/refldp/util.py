"""Small shared utilities."""

import os
from concurrent.futures import ThreadPoolExecutor


def default_jobs() -> int:
    env = os.environ.get("REFLDP_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            return 1
    return os.cpu_count() or 1


def parallel_map(fn, items, jobs: int = 1) -> list:
    """Order-preserving map; threads when jobs > 1.

    Safe for the pure solver workloads in this package; results are
    assembled in input order so parallel runs stay deterministic.
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))
