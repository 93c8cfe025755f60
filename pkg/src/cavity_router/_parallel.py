import os
from concurrent.futures import ThreadPoolExecutor


def worker_count(threads=None) -> int:
    """Explicit ``threads``, else ``ROUTER_THREADS``, else the CPU count."""
    if threads is None:
        env = os.environ.get("ROUTER_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def map_ordered(fn, items, threads=None):
    """``list(map(fn, items))`` on a thread pool; output order follows input order."""
    items = list(items)
    workers = min(worker_count(threads), len(items)) if items else 1
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
