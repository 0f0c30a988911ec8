"""
Strided process pool helper.

Each worker receives ``start`` and ``stride`` keywords and handles items
``start, start+stride, ...``; results are collected through a callback and
returned in worker order.
"""

import logging
import multiprocessing as mp

logger = logging.getLogger(__name__)


def run_strided(func, args=(), kwds=None, nprocs=1):
    """
    Evaluate ``func(*args, start=i, stride=nprocs, **kwds)`` for i in range(nprocs).

    parameters
    ----------
    func : callable
        Module level function (it must be picklable).

    args : tuple
        Positional arguments shared by every worker.

    kwds : dict or None
        Keyword arguments shared by every worker.

    nprocs : int
        Number of processes. 1 runs in the calling process.

    return
    ------
    results : list
        One entry per worker, ordered by `start`.
    """
    kwds = dict(kwds or {})
    nprocs = max(1, int(nprocs or 1))
    if nprocs == 1:
        return [func(*args, start=0, stride=1, **kwds)]

    results = {}

    def collect_result(result):
        start, value = result
        results[start] = value

    def _tagged(start):
        k = dict(kwds)
        k.update(start=start, stride=nprocs)
        return k

    logger.debug("dispatching %s over %d processes", func.__name__, nprocs)
    pool = mp.Pool(nprocs)
    handles = []
    for i in range(nprocs):
        handles.append(pool.apply_async(_call_tagged, args=[func, args, _tagged(i)],
                                        callback=collect_result))
    pool.close()
    pool.join()
    # surface worker exceptions
    for h in handles:
        h.get()
    return [results[i] for i in range(nprocs)]


def _call_tagged(func, args, kwds):
    return kwds['start'], func(*args, **kwds)
