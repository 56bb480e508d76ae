"""
Seeded Monte Carlo sampling of the q-binomial walk, used to validate the
distributional results of the other modules.  This is a validator, not a
pricer.

Contents:
    SampleBatch: terminal Z_N and log-prices at requested grid indices.
    sample: draw paths in blocks of MC_BLOCK_PATHS, optionally in a pool.
    clt_check: (Z_N - E[Z_N])/sqrt(N) against N(0, theta/(1+theta)^2).
    fdd_check: log S at grid times against limit_log_law.
    martingale_check: discounted terminal price against S0.
    empirical_pmf, chi_square_check: Z_N histogram against the Kemp pmf.

Each block of paths owns a Philox stream keyed by (seed, block index), so a
batch depends only on (seed, params, grid, n_paths) and never on how many
workers generated it.
"""
#############
## LOGGING ##
#############
import logging
from qlattice import log_sub, log_fmt, log_date_fmt

DEBUG = False
if DEBUG:
    level = logging.DEBUG
else:
    level = logging.INFO
LOGGER = logging.getLogger(__name__)
logging.basicConfig(
    level=level,
    style=log_sub,
    format=log_fmt,
    datefmt=log_date_fmt,
    force=True
)

LOGDEBUG = LOGGER.debug
LOGINFO = LOGGER.info
LOGWARNING = LOGGER.warning
LOGERROR = LOGGER.error
LOGEXCEPTION = LOGGER.exception

#############
## IMPORTS ##
#############
import math
import time as timemodule
import multiprocessing as mp
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chisquare

from qlattice.errors import ParameterError
from qlattice.dist import KempParams, kemp_moments, kemp_pmf_table
from qlattice.lattice import build_schedule, bond_price
from qlattice.limit import limit_log_law

MC_BLOCK_PATHS = 2048

# acceptance band, in standard errors
SE_BAND = 4.0

# chi-square p-values below this are flagged
CHI2_FLAG_PVALUE = 1e-4


@dataclass(frozen=True)
class SampleBatch:
    seed: int
    n_paths: int
    N: int
    terminal_Z: np.ndarray
    log_prices_at: dict = field(default_factory=dict)
    grid: tuple = ()
    indices: tuple = ()


def grid_indices(grid, T, N):
    """floor(N t / T) for each t, with a 1e-9 guard against t N/T landing just below an integer."""
    out = []
    for t in grid:
        out.append(int(min(N, math.floor(N * t / T + 1e-9))))
    return out


def _check_grid(grid, T):
    grid = [float(t) for t in grid]
    if any(not 0.0 <= t <= T * (1 + 1e-12) for t in grid):
        raise ParameterError(f"grid times must lie in [0, T={T}], got {grid}")
    if any(b < a for a, b in zip(grid[:-1], grid[1:])):
        raise ParameterError(f"grid must be sorted, got {grid}")
    return grid


def block_generator(seed, block):
    """Philox stream for one block; the block index fills the upper key word."""
    return np.random.Generator(np.random.Philox(key=int(seed) + (int(block) << 64)))


def _sample_block(args):
    seed, block, size, p, indices = args
    rng = block_generator(seed, block)
    X = rng.random((size, p.shape[0])) < p
    Z = np.cumsum(X, axis=1, dtype=np.int32)
    # Z_0 = 0 for records at the origin
    Z_at = np.zeros((size, len(indices)), dtype=np.int32)
    for j, n in enumerate(indices):
        if n > 0:
            Z_at[:, j] = Z[:, n - 1]
    return Z[:, -1].copy(), Z_at


def sample(params, grid, n_paths, seed, nworkers=1):
    """
    Draw n_paths independent walks X_k ~ Bernoulli(p_k) from the schedule of
    `params` and record Z_N plus log S_n at n = floor(N t/T) for t in grid.
    """
    if int(n_paths) != n_paths or n_paths < 1:
        raise ParameterError(f"n_paths must be a positive integer, got {n_paths}")
    if not 0 <= int(seed) < 2**64:
        raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
    grid = _check_grid(grid, params.T)
    sched = build_schedule(params)
    N = sched.N
    indices = grid_indices(grid, params.T, N)
    p = np.asarray(sched.switch_probs, dtype=np.float64)

    nblocks = -(-int(n_paths) // MC_BLOCK_PATHS)
    tasks = []
    for b in range(nblocks):
        size = min(MC_BLOCK_PATHS, int(n_paths) - b * MC_BLOCK_PATHS)
        tasks.append((int(seed), b, size, p, tuple(indices)))

    start_time = timemodule.time()
    if nworkers > 1 and nblocks > 1:
        from qlattice.mp_converge import default_nworkers
        nworkers = max(1, min(nworkers, default_nworkers(), nblocks))
        pool = mp.Pool(nworkers, maxtasksperchild=1000)
        try:
            results = pool.map(_sample_block, tasks)
        finally:
            pool.close()
            pool.join()
    else:
        results = [_sample_block(t) for t in tasks]
    elapsed_time = timemodule.time() - start_time
    LOGDEBUG(f"sampled {n_paths} paths of N={N} in {nblocks} blocks, {elapsed_time:.2f} s")

    terminal_Z = np.concatenate([r[0] for r in results])
    Z_at = np.concatenate([r[1] for r in results], axis=0)

    log_s0 = math.log(params.S0)
    log_prices_at = {}
    for j, n in enumerate(indices):
        z = Z_at[:, j].astype(np.float64)
        log_prices_at[n] = log_s0 + z * sched.log_b + (n - z) * sched.log_a

    return SampleBatch(seed=int(seed), n_paths=int(n_paths), N=N,
                       terminal_Z=terminal_Z, log_prices_at=log_prices_at,
                       grid=tuple(grid), indices=tuple(indices))


def _mean_and_var_se(x):
    """Sample mean, variance and their standard errors."""
    n = x.shape[0]
    if np.all(x == x[0]):
        return float(x[0]), 0.0, 0.0, 0.0
    mean = float(np.mean(x))
    d = x - mean
    var = float(np.mean(d * d))
    m4 = float(np.mean(d**4))
    se_mean = math.sqrt(var / n)
    se_var = math.sqrt(max(m4 - var * var, 0.0) / n)
    return mean, var, se_mean, se_var


def _zscore(value, target, se):
    if se > 0:
        return (value - target) / se
    return 0.0 if value == target else math.inf


def clt_check(batch, params, rel_tol=0.03):
    """
    Empirical mean and variance of (Z_N - E[Z_N])/sqrt(N), with E[Z_N] exact
    from kemp_moments, against the limiting variance theta/(1+theta)^2.
    """
    sched = build_schedule(params)
    N = batch.N
    exact_mean, exact_var = kemp_moments(KempParams(N, params.theta, sched.qN))
    y = (batch.terminal_Z.astype(np.float64) - exact_mean) / math.sqrt(N)
    mean, var, se_mean, se_var = _mean_and_var_se(y)

    target = params.theta / (1.0 + params.theta) ** 2
    rel_dev = abs(var - target) / target
    z_mean = _zscore(mean, 0.0, se_mean)
    z_var = _zscore(var, target, se_var)
    passed = rel_dev <= rel_tol and abs(z_mean) <= SE_BAND
    return {
        'N': N,
        'n_paths': batch.n_paths,
        'exact_mean_Z': exact_mean,
        'exact_var_scaled': exact_var / N,
        'empirical_mean': mean,
        'empirical_var': var,
        'target_var': target,
        'relative_var_deviation': rel_dev,
        'z_mean': z_mean,
        'z_var': z_var,
        'passed': bool(passed),
    }


def fdd_check(batch, params, grid=None):
    """
    For every recorded grid time: empirical mean and variance of log S
    against the mean_log and var_log of limit_log_law, with SE_BAND bands.
    """
    grid = batch.grid if grid is None else _check_grid(grid, params.T)
    indices = grid_indices(grid, params.T, batch.N)
    rows = []
    for t, n in zip(grid, indices):
        if n not in batch.log_prices_at:
            raise ParameterError(f"grid time t={t} (index {n}) was not recorded in the batch")
        x = batch.log_prices_at[n]
        mean, var, se_mean, se_var = _mean_and_var_se(x)
        law = limit_log_law(t, params)
        z_mean = _zscore(mean, law.mean_log, se_mean)
        z_var = _zscore(var, law.var_log, se_var)
        rows.append({
            't': t,
            'index': n,
            'empirical_mean': mean,
            'target_mean': law.mean_log,
            'se_mean': se_mean,
            'z_mean': z_mean,
            'empirical_var': var,
            'target_var': law.var_log,
            'se_var': se_var,
            'z_var': z_var,
            'passed': bool(abs(z_mean) <= SE_BAND and abs(z_var) <= SE_BAND),
        })
    return {'times': rows, 'passed': all(r['passed'] for r in rows)}


def martingale_check(batch, params):
    """Mean of prod(1+r_k)^{-1} S_N against S0."""
    sched = build_schedule(params)
    z = batch.terminal_Z.astype(np.float64)
    log_sN = math.log(params.S0) + z * sched.log_b + (batch.N - z) * sched.log_a
    discounted = np.exp(log_sN) * bond_price(sched)
    mean, _, se_mean, _ = _mean_and_var_se(discounted)
    z_score = _zscore(mean, params.S0, se_mean)
    return {
        'empirical_mean': mean,
        'target': params.S0,
        'se_mean': se_mean,
        'z_mean': z_score,
        'passed': bool(abs(z_score) <= SE_BAND),
    }


def empirical_pmf(batch):
    counts = np.bincount(batch.terminal_Z, minlength=batch.N + 1)
    return counts / batch.n_paths


def chi_square_check(batch, params, min_expected=5.0):
    """
    Pearson chi-square of the Z_N histogram against the Kemp pmf.  Classes
    with expected count below min_expected are pooled into one bin.
    """
    sched = build_schedule(params)
    pmf = kemp_pmf_table(KempParams(batch.N, params.theta, sched.qN)).probs
    observed = np.bincount(batch.terminal_Z, minlength=batch.N + 1).astype(np.float64)
    expected = pmf * batch.n_paths

    keep = expected >= min_expected
    f_obs = observed[keep]
    f_exp = expected[keep]
    if np.any(~keep):
        f_obs = np.append(f_obs, observed[~keep].sum())
        f_exp = np.append(f_exp, expected[~keep].sum())
    if f_obs.shape[0] < 2:
        raise ParameterError("chi-square check needs at least two classes with enough mass")
    f_exp = f_exp * (f_obs.sum() / f_exp.sum())

    stat, pvalue = chisquare(f_obs, f_exp)
    flagged = pvalue < CHI2_FLAG_PVALUE
    if flagged:
        LOGWARNING(f"chi-square p-value {pvalue:.2e} for N={batch.N}, seed={batch.seed}")
    return {
        'statistic': float(stat),
        'pvalue': float(pvalue),
        'dof': int(f_obs.shape[0] - 1),
        'flagged': bool(flagged),
    }
