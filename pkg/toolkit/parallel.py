import logging

from joblib import Parallel, delayed

from options import options

logger = logging.getLogger(__name__)


def parallel_map(func, items, prefer="threads"):
    """
    Map `func` over `items` with at most options['threads'] workers.

    Results come back in input order whatever the worker count, so callers can
    merge them deterministically.
    """
    items = list(items)
    n_jobs = min(options["threads"], max(1, len(items)))
    if n_jobs == 1:
        return [func(item) for item in items]
    logger.debug(f"Dispatching {len(items)} tasks over {n_jobs} workers")
    return Parallel(n_jobs=n_jobs, prefer=prefer)(delayed(func)(item) for item in items)
