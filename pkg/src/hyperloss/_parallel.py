import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "HYPERLOSS_THREADS"


def n_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def ordered_map(func, items):
    """``list(map(func, items))``, fanned out over threads when configured.

    Results always come back in input order.
    """
    items = list(items)
    workers = n_threads()
    if workers == 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
