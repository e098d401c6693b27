import time
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Sequence, Union

import numpy as np

import logging
logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


def profiled(func, *args, **kwargs):
    """Function wrapper for measuring execution time."""
    def wrapper(*args, **kwargs):
        name = func.__qualname__
        start = time.time()
        output = func(*args, **kwargs)
        delta = time.time() - start
        logger.debug(f"{name} {delta:,.4f} s")
        return output
    wrapper.__wrapped__ = func
    wrapper.__name__ = func.__name__
    wrapper.__qualname__ = func.__qualname__
    wrapper.__doc__ = func.__doc__
    return wrapper


def parallel_map(func: Callable, items: Iterable, jobs: int = 1) -> List:
    """Maps func over items, in worker processes if jobs > 1.

    The output order is the input order, independent of jobs. func must be
    a module-level function so that it can be pickled.
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(func, items))


def stream_rng(seed: Union[int, Sequence[int]], *indices: int) -> np.random.Generator:
    """Independent PCG64 stream for (seed, indices...).

    Streams are identical on every platform and for any worker layout.
    """
    if isinstance(seed, (int, np.integer)):
        key = [int(seed)]
    else:
        key = [int(s) for s in seed]
    return np.random.default_rng(key + [int(i) for i in indices])
