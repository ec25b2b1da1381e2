"""Ordered fan-out over worker threads."""
from concurrent.futures import ThreadPoolExecutor

from hessdir._config import options


def map_ordered(func, items, max_workers=None):
    """
    ``[func(item) for item in items]``, optionally on worker threads.

    Results come back in input order, so reductions over them do not depend
    on the number of workers.

    Parameters
    ----------
    func : callable
    items : iterable
    max_workers : int, optional
        Defaults to ``options.max_workers``.
    """
    items = list(items)
    workers = options.max_workers if max_workers is None else max_workers
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def batches(size, batch_size):
    """Consecutive ``slice`` objects covering ``range(size)``."""
    return [
        slice(start, min(start + batch_size, size))
        for start in range(0, size, batch_size)
    ]


def argmin_reduce(results):
    """
    Minimum of ``(margin, payload)`` results, earliest wins ties.

    NaN margins are skipped; returns ``(nan, None)`` when nothing is left.
    """
    best = (float("nan"), None)
    for margin, payload in results:
        if margin != margin:
            continue
        if best[1] is None or margin < best[0]:
            best = (margin, payload)
    return best
