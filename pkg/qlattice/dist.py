"""
The Kemp (q-binomial) distribution and the q-geometric default time.

Contents:

Bernoulli schedule:
    switch_prob, complement_prob, switch_probs

Kemp distribution of Z_n = X_1 + ... + X_n:
    KempParams, PmfTable
    kemp_log_pmf, kemp_log_pmf_vector, kemp_pmf_table, kemp_cdf
    kemp_tail, kemp_moments, kemp_pgf
    count_inversions, word_probability

q-geometric default time (first k with X_k = 0):
    qgeom_survival, qgeom_pmf, failure_rate, failure_curve
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
from dataclasses import dataclass

import numba
import numpy as np
import pandas as pd
from scipy.special import expit, logsumexp

from qlattice.errors import ParameterError, TableSizeError
from qlattice.qnum import (
    NEG_INF, QValue, as_qvalue, log_q_binomial, log_q_binomial_row,
    log_rising_product
)

# largest n for which the O(n^2) forward recurrence is run
PMF_TABLE_CAP = 20_000


@dataclass(frozen=True)
class KempParams:
    """(n, theta, q) identifying the law of Z_n."""
    n: int
    theta: float
    q: QValue

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ParameterError(f"n must be a nonnegative integer, got {self.n}")
        if not (self.theta > 0) or not np.isfinite(self.theta):
            raise ParameterError(f"theta must be finite and > 0, got {self.theta}")
        object.__setattr__(self, 'n', int(self.n))
        object.__setattr__(self, 'theta', float(self.theta))
        object.__setattr__(self, 'q', as_qvalue(self.q))


@dataclass(frozen=True)
class PmfTable:
    params: KempParams
    log_probs: np.ndarray

    @property
    def probs(self):
        return np.exp(self.log_probs)

    def to_frame(self):
        p = self.probs
        return pd.DataFrame({
            'k': np.arange(self.params.n + 1),
            'pmf': p,
            'cdf': np.cumsum(p),
            'log_pmf': self.log_probs,
        })


def _log_odds(k, theta, q):
    # log(theta q^{k-1}), vectorized over k
    q = as_qvalue(q)
    return math.log(theta) + (np.asarray(k, dtype=np.float64) - 1.0) * q.log1p_q


def switch_probs(n, theta, q, start=1):
    """
    Up-probabilities p_k = theta q^{k-1}/(1 + theta q^{k-1}) and their
    complements for k = start .. start+n-1.

    The larger of (p_k, 1-p_k) is computed directly and the smaller as one
    minus it, so p + c == 1 exactly for every entry.
    """
    k = np.arange(start, start + n)
    x = _log_odds(k, theta, q)
    big = expit(np.abs(x))
    small = 1.0 - big
    p = np.where(x >= 0, big, small)
    c = np.where(x >= 0, small, big)
    return p, c


def switch_prob(k, theta, q):
    """P(X_k = 1) = theta q^{k-1}/(1 + theta q^{k-1})."""
    if k < 1:
        raise ParameterError(f"step index k must be >= 1, got {k}")
    p, _ = switch_probs(1, theta, q, start=k)
    return float(p[0])


def complement_prob(k, theta, q):
    """P(X_k = 0) = 1/(1 + theta q^{k-1}); switch_prob + complement_prob == 1."""
    if k < 1:
        raise ParameterError(f"step index k must be >= 1, got {k}")
    _, c = switch_probs(1, theta, q, start=k)
    return float(c[0])


def kemp_log_pmf(params, k):
    """
    log P(Z_n = k) = k log(theta) + k(k-1)/2 log(q) + log (n choose k)_q
                     - log prod_{l=1..n}(1 + theta q^{l-1}),
    -inf for k outside 0..n.
    """
    n, theta, q = params.n, params.theta, params.q
    if k < 0 or k > n:
        return NEG_INF
    return (k * math.log(theta) + 0.5 * k * (k - 1) * q.log1p_q
            + log_q_binomial(n, k, q) - log_rising_product(n, theta, q))


def kemp_log_pmf_vector(params):
    """All n+1 closed-form log probabilities in O(n)."""
    n, theta, q = params.n, params.theta, params.q
    k = np.arange(n + 1, dtype=np.float64)
    return (k * math.log(theta) + 0.5 * k * (k - 1.0) * q.log1p_q
            + log_q_binomial_row(n, q) - log_rising_product(n, theta, q))


@numba.njit
def _forward_recurrence(p, c):
    # P_{j+1}(k) = P_j(k) c_{j+1} + P_j(k-1) p_{j+1}, updated in place from the top
    n = p.shape[0]
    probs = np.zeros(n + 1)
    probs[0] = 1.0
    for j in range(n):
        probs[j + 1] = probs[j] * p[j]
        for k in range(j, 0, -1):
            probs[k] = probs[k] * c[j] + probs[k - 1] * p[j]
        probs[0] = probs[0] * c[j]
    return probs


def kemp_pmf_table(params, cap=PMF_TABLE_CAP):
    """
    Build the pmf of Z_n by the forward recurrence over steps (O(n^2)).

    Entries that underflow in linear scale are taken from the closed form, so
    every stored log-probability is finite.
    """
    n = params.n
    if n > cap:
        raise TableSizeError(f"pmf table requested for n={n} > cap={cap}")
    p, c = switch_probs(n, params.theta, params.q)
    probs = _forward_recurrence(p, c)

    tiny = np.finfo(np.float64).tiny
    bad = ~(probs >= tiny)
    with np.errstate(divide='ignore'):
        log_probs = np.log(probs)
    if np.any(bad):
        LOGDEBUG(f"kemp_pmf_table: {bad.sum()} of {n+1} classes filled from closed form")
        log_probs[bad] = kemp_log_pmf_vector(params)[bad]
    return PmfTable(params=params, log_probs=log_probs)


def kemp_cdf(params):
    return np.cumsum(np.exp(kemp_log_pmf_vector(params)))


def kemp_tail(params, m):
    """P(Z_n >= m) via log-sum-exp over k = m..n."""
    if m <= 0:
        return 1.0
    if m > params.n:
        return 0.0
    log_pmf = kemp_log_pmf_vector(params)
    return float(min(1.0, math.exp(logsumexp(log_pmf[m:]))))


def kemp_moments(params):
    """Exact mean sum(p_k) and variance sum(p_k (1 - p_k))."""
    p, c = switch_probs(params.n, params.theta, params.q)
    return math.fsum(p), math.fsum(p * c)


def kemp_pgf(params, t):
    """
    E[t^{Z_n}] = prod_{l=1..n} (1 + theta t q^{l-1}) / (1 + theta q^{l-1}).

    The product runs over all n factors, starting at (1 + theta t).
    """
    if not 0.0 <= t <= 1.0:
        raise ParameterError(f"pgf argument must lie in [0, 1], got {t}")
    n, theta, q = params.n, params.theta, params.q
    if n == 0:
        return 1.0
    if t == 0.0:
        return math.exp(-log_rising_product(n, theta, q))
    l = np.arange(n, dtype=np.float64)
    num = np.logaddexp(0.0, math.log(theta * t) + l * q.log1p_q)
    return math.exp(math.fsum(num) - log_rising_product(n, theta, q))


def count_inversions(word):
    """Number of pairs i < j with word[i] == 0 and word[j] == 1."""
    zeros_seen = 0
    inversions = 0
    for x in word:
        if x == 0:
            zeros_seen += 1
        else:
            inversions += zeros_seen
    return inversions


def word_probability(word, theta, q):
    """
    Probability of observing the 0/1 word (X_1, ..., X_n):

        theta^k q^{l + k(k-1)/2} / prod_{i=1..n}(1 + theta q^{i-1})

    with k the number of ones and l the number of inversions.
    """
    q = as_qvalue(q)
    n = len(word)
    k = int(sum(word))
    l = count_inversions(word)
    return math.exp(k * math.log(theta) + (l + 0.5 * k * (k - 1)) * q.log1p_q
                    - log_rising_product(n, theta, q))


def _check_k(k):
    if k < 1:
        raise ParameterError(f"default-time index k must be >= 1, got {k}")


def qgeom_survival(k, theta, q):
    """P(tau >= k) = prod_{l=1..k-1} theta q^{l-1}/(1 + theta q^{l-1})."""
    _check_k(k)
    if k == 1:
        return 1.0
    x = _log_odds(np.arange(1, k), theta, q)
    # log p_l = x - log(1 + e^x)
    return math.exp(math.fsum(x - np.logaddexp(0.0, x)))


def failure_rate(k, theta, q):
    """
    Logistic failure rate P(tau = k | tau >= k) = 1/(1 + theta q^{k-1}).

    Evaluated as expit(-x) rather than through the exact-complement pair so
    that the hazard keeps full relative precision when it is small.
    """
    _check_k(k)
    return float(expit(-_log_odds(k, theta, q)))


def qgeom_pmf(k, theta, q):
    """P(tau = k) = P(tau >= k) / (1 + theta q^{k-1})."""
    return qgeom_survival(k, theta, q) * failure_rate(k, theta, q)


def failure_curve(kmax, theta, q):
    """Survival, default pmf and hazard for k = 1..kmax as a DataFrame."""
    if kmax < 1:
        raise ParameterError(f"kmax must be >= 1, got {kmax}")
    q = as_qvalue(q)
    ks = np.arange(1, kmax + 1)
    survival = np.array([qgeom_survival(int(k), theta, q) for k in ks])
    hazard = expit(-_log_odds(ks, theta, q))
    return pd.DataFrame({
        'k': ks,
        'survival': survival,
        'pmf': survival * hazard,
        'hazard': hazard,
    })
