import os
import multiprocessing as mp
from .converge import _price_one
from .errors import ParameterError


def default_nworkers():
    """cpu_count(), bounded above by QLATTICE_THREADS when it is set."""
    nworkers = mp.cpu_count()
    env = os.environ.get("QLATTICE_THREADS")
    if env:
        try:
            threads = int(env)
        except ValueError:
            raise ParameterError(
                f"QLATTICE_THREADS must be a positive integer, got {env!r}"
            ) from None
        if threads < 1:
            raise ParameterError(f"QLATTICE_THREADS must be >= 1, got {threads}")
        nworkers = min(nworkers, threads)
    return nworkers


def _worker(args):
    params, N, method = args
    return N, _price_one(params, N, method)


def fast_prices(params, N_list, method='closed', nworkers=None):
    """
    Parallel variant of the sweep pricing loop, one task per grid size.
    Prices come back in N_list order.
    """
    if nworkers is None:
        nworkers = default_nworkers()
    nworkers = max(1, min(nworkers, default_nworkers(), len(N_list)))

    maxworkertasks = 1000
    pool = mp.Pool(nworkers, maxtasksperchild=maxworkertasks)
    tasks = [(params, N, method) for N in N_list]
    try:
        results = pool.map(_worker, tasks)
    finally:
        pool.close()
        pool.join()

    assert [r[0] for r in results] == list(N_list)
    return [float(r[1]) for r in results]
