import os
from concurrent.futures import ProcessPoolExecutor


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("UAVLAB_THREADS", "1"))
    return max(1, threads)


def pmap(fn, items, threads: int | None = None, chunksize: int = 16) -> list:
    """Ordered map; worker count never changes the result."""
    n = resolve_threads(threads)
    items = list(items)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items, chunksize=chunksize))
