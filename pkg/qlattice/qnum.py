"""
Numerically stable q-arithmetic.

Contents:
    QValue: trend base q with its precomputed log.
    as_qvalue: coerce a float or QValue to a QValue.
    q_integer / log_q_integer: the q-integer [m]_q = 1 + q + ... + q^{m-1}.
    log_q_binomial: log of the Gaussian binomial coefficient.
    log_q_factorials: log [j]_q! for j = 0..n.
    log_q_binomial_row: all coefficients of row n in O(n) via the ratio identity.
    q_binomial: linear-scale coefficient (n <= 60 only).
    log_rising_product: log of (1+theta)(1+theta q)...(1+theta q^{n-1}).
    compensated_cumsum: Kahan prefix sums used for length-N log accumulations.

Everything here is valid for q arbitrarily close to 1.  The exact branch
q == 1 returns the classical values.
"""
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from qlattice.errors import ParameterError

NEG_INF = -np.inf

# linear-scale combinatorics beyond this n overflow quickly for q > 1
LINEAR_N_MAX = 60


@dataclass(frozen=True)
class QValue:
    """
    Trend base q > 0.  `log1p_q` is log(q) computed as log1p(q - 1), and is
    exactly 0.0 when q == 1.
    """
    q: float
    log1p_q: float = field(init=False)

    def __post_init__(self):
        q = float(self.q)
        if not (q > 0) or not np.isfinite(q):
            raise ParameterError(f"q must be finite and > 0, got {self.q}")
        object.__setattr__(self, 'q', q)
        object.__setattr__(self, 'log1p_q', math.log1p(q - 1.0))

    @property
    def is_one(self):
        return self.log1p_q == 0.0


def as_qvalue(q):
    if isinstance(q, QValue):
        return q
    return QValue(q)


@numba.njit
def compensated_cumsum(x):
    """
    Prefix sums of x with Kahan compensation.  Returns an array of length
    len(x)+1 whose first entry is 0.
    """
    n = x.shape[0]
    out = np.empty(n + 1)
    out[0] = 0.0
    s = 0.0
    c = 0.0
    for i in range(n):
        y = x[i] - c
        t = s + y
        c = (t - s) - y
        s = t
        out[i + 1] = s
    return out


def q_integer(m, q):
    """[m]_q = (1 - q^m)/(1 - q), exactly m when q == 1."""
    if m < 0:
        raise ParameterError(f"q_integer needs m >= 0, got {m}")
    q = as_qvalue(q)
    if m == 0:
        return 0.0
    if q.is_one:
        return float(m)
    L = q.log1p_q
    return math.expm1(m * L) / math.expm1(L)


def log_q_integer(m, q):
    """
    log [m]_q, vectorized over integer array m.  Entries with m == 0 map to
    -inf.  For q > 1 the common factor q^{m-1} is pulled out so that large
    m*log(q) never overflows.
    """
    q = as_qvalue(q)
    m = np.asarray(m, dtype=np.float64)
    L = q.log1p_q
    with np.errstate(divide='ignore'):
        if L == 0.0:
            return np.log(m)
        if L > 0:
            # (q^m - 1)/(q - 1) = q^{m-1} (1 - q^{-m}) / (1 - q^{-1})
            return ((m - 1.0) * L + np.log(-np.expm1(-m * L))
                    - np.log(-np.expm1(-L)))
        return np.log(-np.expm1(m * L)) - np.log(-np.expm1(L))


def log_q_binomial(n, k, q):
    """
    log of the Gaussian binomial coefficient (n choose k)_q, i.e. the log of
    prod_{i=1..k} [n-k+i]_q / [i]_q.  Out-of-range k returns -inf.

    The product is always taken over min(k, n-k) factors, so the result is
    exactly symmetric in k <-> n-k.
    """
    if k < 0 or k > n:
        return NEG_INF
    kk = min(k, n - k)
    if kk == 0:
        return 0.0
    i = np.arange(1, kk + 1)
    num = log_q_integer(n - kk + i, q)
    den = log_q_integer(i, q)
    return math.fsum(np.concatenate([num, -den]))


def log_q_binomial_row(n, q):
    """
    log (n choose k)_q for k = 0..n in O(n), via the ratio identity

        log C(n, k+1) = log C(n, k) + log [n-k]_q - log [k+1]_q

    accumulated with compensated summation.
    """
    if n < 0:
        raise ParameterError(f"row index must be >= 0, got {n}")
    if n == 0:
        return np.zeros(1)
    k = np.arange(n)
    steps = log_q_integer(n - k, q) - log_q_integer(k + 1, q)
    return compensated_cumsum(steps)


def q_binomial(n, k, q):
    """Linear-scale (n choose k)_q; only for n <= LINEAR_N_MAX."""
    if n > LINEAR_N_MAX:
        raise ParameterError(
            f"linear q-binomial limited to n <= {LINEAR_N_MAX}, got n={n}; "
            "use log_q_binomial"
        )
    lqb = log_q_binomial(n, k, q)
    if lqb == NEG_INF:
        return 0.0
    return math.exp(lqb)


def log_q_factorials(n, q):
    """log [j]_q! for j = 0..n, as compensated prefix sums of log [i]_q."""
    if n < 0:
        raise ParameterError(f"n must be >= 0, got {n}")
    return compensated_cumsum(log_q_integer(np.arange(1, n + 1), q))


def log_rising_product(n, theta, q):
    """sum_{l=1..n} log(1 + theta q^{l-1}), summed exactly with math.fsum."""
    if not theta > 0:
        raise ParameterError(f"theta must be > 0, got {theta}")
    if n == 0:
        return 0.0
    return math.fsum(log_rising_terms(n, theta, q))


def log_rising_terms(n, theta, q):
    """The n individual terms log(1 + theta q^{l-1}), l = 1..n."""
    q = as_qvalue(q)
    l = np.arange(n, dtype=np.float64)
    return np.logaddexp(0.0, math.log(theta) + l * q.log1p_q)
