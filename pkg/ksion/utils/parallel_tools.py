"""
Process fan-out with joblib and scalar summary statistics.

Work is split into independent items whose results are merged by the
caller; nothing here depends on the number of workers.
"""
import joblib
import numpy as np
import psutil

from ksion.utils.errors import ParameterError


def num_workers(n=None):
    """
    Resolve a worker count.

    ``None`` or ``1`` means run inline, ``"auto"`` (or ``-1``) the number
    of physical cores.
    """
    if n is None:
        return 1
    if n == "auto" or n == -1:
        return max(1, psutil.cpu_count(logical=False) or 1)
    n = int(n)
    if n < 1:
        raise ParameterError("Worker count must be positive, got %d." % n)
    return n


def parallel_map(fn, items, n_jobs=None):
    """
    ``[fn(x) for x in items]``, spread over ``n_jobs`` processes.

    Results are returned in input order.
    """
    items = list(items)
    n = num_workers(n_jobs)
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    return joblib.Parallel(n_jobs=min(n, len(items)))(joblib.delayed(fn)(x) for x in items)


def statistics_scalar(x, with_min_and_max=False):
    """
    Get mean/std and optional min/max of scalar x.

    Args:
        x: An array containing samples of the scalar to produce statistics
            for.

        with_min_and_max (bool): If true, return min and max of x in
            addition to mean and std.
    """
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    mean = np.sum(x) / n if n > 0 else np.nan
    std = np.sqrt(np.sum((x - mean) ** 2) / n) if n > 0 else np.nan

    if with_min_and_max:
        x_min = np.min(x) if n > 0 else np.inf
        x_max = np.max(x) if n > 0 else -np.inf
        return mean, std, x_min, x_max
    return mean, std
