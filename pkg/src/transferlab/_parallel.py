"""Order-preserving parallel map and the thread-count setting."""
import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "TRANSFERLAB_THREADS"


def default_threads():
    """Thread count from ``TRANSFERLAB_THREADS``, else the machine parallelism."""
    value = os.environ.get(ENV_THREADS)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return os.cpu_count() or 1


def ordered_map(func, items, threads=None):
    """``[func(x) for x in items]`` evaluated on up to ``threads`` workers.

    Results come back in input order, so reductions downstream see the same
    sequence regardless of the thread count.
    """
    items = list(items)
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))
