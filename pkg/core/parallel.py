import logging
from concurrent.futures import ProcessPoolExecutor

from core.conf import bicopula_settings

logger = logging.getLogger(__name__)


def resolve_workers(workers=None):
    if workers is None:
        workers = bicopula_settings.WORKERS
    return max(1, int(workers))


def map_ordered(fn, items, workers=None, chunksize=1):
    """
    Apply `fn` to every item and return results in input order.

    With more than one worker the calls run in a process pool; results still come
    back in input order, so output never depends on completion order.
    """
    items = list(items)
    workers = resolve_workers(workers)
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.debug('dispatching %d tasks to %d workers', len(items), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
