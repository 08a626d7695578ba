import itertools
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def compositions(total, parts):
    """All tuples of ``parts`` nonnegative ints summing to ``total``, lexicographic."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def loglog_slope(x, y):
    """Least-squares slope and residuals of log(y) against log(x)."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), ly - (slope * lx + intercept)


def ordered_map(fn, items, threads=1):
    """Map preserving input order; ``threads > 1`` uses a thread pool."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def integer_box(lo, hi):
    """Integer vectors m with lo <= m <= hi componentwise, as an (N, d) array."""
    axes = [np.arange(int(a), int(b) + 1) for a, b in zip(lo, hi)]
    if any(len(a) == 0 for a in axes):
        return np.empty((0, len(axes)), dtype=np.int64)
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def product_grid(axes):
    return np.array(list(itertools.product(*axes)), dtype=float)
