"""
Edgeworth-corrected normal approximation of Kemp tails, and the rate classifier.

Contents:
    TailApprox: bundle of z_m, sigma_N^2, skew factor, approximate tail, eps_N.
    edgeworth_tail: P(Z_n >= m) for independent non-identical Bernoulli steps.
    edgeworth_call_tail: the same, with m and eps_N taken from a call market.
    price_edgeworth: fast approximate call price from the two tails.
    predict_rate: O(1/N) iff theta == 1 and zeta == 1, else O(1/sqrt(N)).

The expansion is

    P(Z_n >= m) ~ Phi(-z_m) + (z_m^2 - 1)/(6 sigma_N) phi(z_m) * skew,
    skew = 1 - (2/sigma_N^2) sum_k p_k^2 (1 - p_k),
    z_m = (m - sum_k p_k - 1/2)/sigma_N,

where skew * sigma_N^2 is the third cumulant of Z_n.
"""
import math
from dataclasses import dataclass
from enum import Enum

from qlattice.errors import ParameterError
from qlattice.dist import switch_probs
from qlattice.lattice import build_schedule, bond_price, call_cutoff, theta_N
from qlattice.limit import normal_cdf, normal_pdf
from qlattice.qnum import as_qvalue

RATE_TOL = 1e-12


class Rate(str, Enum):
    order_1_over_N = 'order_1_over_N'
    order_1_over_sqrtN = 'order_1_over_sqrtN'

    @property
    def exponent(self):
        return -1.0 if self is Rate.order_1_over_N else -0.5


@dataclass(frozen=True)
class TailApprox:
    z_m: float
    sigma2_N: float
    skew_correction: float
    value: float
    eps_N: float = None
    z_m_eps: float = None


def _bernoulli_sums(n, theta, q):
    p, c = switch_probs(n, theta, q)
    mean = math.fsum(p)
    var = math.fsum(p * c)
    skew_sum = math.fsum(p * p * c)
    return mean, var, skew_sum


def _check_variance(var):
    if not var > 0:
        raise ParameterError(f"degenerate Bernoulli schedule: sigma_N^2 = {var}")


def _tail_value(z, sigma, skew):
    value = normal_cdf(-z) + (z * z - 1.0) / (6.0 * sigma) * normal_pdf(z) * skew
    return float(min(1.0, max(0.0, value)))


def edgeworth_tail(n, m, theta, q):
    """Edgeworth approximation of P(Z_n >= m) under up-probabilities theta q^{k-1}/(1+theta q^{k-1})."""
    if n < 1 or not 1 <= m <= n:
        raise ParameterError(f"edgeworth_tail needs n >= 1 and 1 <= m <= n, got n={n}, m={m}")
    q = as_qvalue(q)
    mean, var, skew_sum = _bernoulli_sums(n, theta, q)
    _check_variance(var)
    sigma = math.sqrt(var)
    skew = 1.0 - 2.0 * skew_sum / var
    z = (m - mean - 0.5) / sigma
    return TailApprox(z_m=z, sigma2_N=var, skew_correction=skew,
                      value=_tail_value(z, sigma, skew))


def edgeworth_call_tail(params, measure='stock', sched=None):
    """
    TailApprox of P(Z_N >= m) at the call cutoff m, under the stock measure
    (theta_N = theta b/a) or the bond measure (theta).

    z_m is also rebuilt through eps_N as

        z_m = (log(K/S0) - sum_k(log a + p_k log(b/a)))/(log(b/a) sigma_N)
              + (eps_N - 1/2)/sigma_N

    and stored in `z_m_eps`.  Returns None-valued tails when m falls outside
    1..N, where the tail is exactly 0 or 1.
    """
    sched = build_schedule(params) if sched is None else sched
    N = sched.N
    m, eps = call_cutoff(params, sched)
    if measure == 'stock':
        th = theta_N(sched)
    elif measure == 'bond':
        th = sched.theta
    else:
        raise ParameterError(f"measure must be 'stock' or 'bond', got {measure!r}")

    mean, var, skew_sum = _bernoulli_sums(N, th, sched.qN)
    _check_variance(var)
    sigma = math.sqrt(var)
    skew = 1.0 - 2.0 * skew_sum / var
    z = (m - mean - 0.5) / sigma

    log_ratio = sched.log_b - sched.log_a
    z_eps = ((math.log(params.K / params.S0) - N * sched.log_a - mean * log_ratio)
             / (log_ratio * sigma) + (eps - 0.5) / sigma)

    if m <= 0:
        value = 1.0
    elif m > N:
        value = 0.0
    else:
        value = _tail_value(z, sigma, skew)
    return TailApprox(z_m=z, sigma2_N=var, skew_correction=skew, value=value,
                      eps_N=min(1.0, max(0.0, eps)), z_m_eps=z_eps)


def price_edgeworth(params, sched=None):
    """S0 edgeworth(theta_N) - K B edgeworth(theta)."""
    sched = build_schedule(params) if sched is None else sched
    upper = edgeworth_call_tail(params, 'stock', sched).value
    lower = edgeworth_call_tail(params, 'bond', sched).value
    return params.S0 * upper - params.K * bond_price(sched) * lower


def predict_rate(params):
    """Rate.order_1_over_N iff theta == 1 and zeta == 1 (within RATE_TOL)."""
    zeta = params.effective_zeta
    if abs(params.theta - 1.0) <= RATE_TOL and abs(zeta - 1.0) <= RATE_TOL:
        return Rate.order_1_over_N
    return Rate.order_1_over_sqrtN
