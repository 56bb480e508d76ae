"""
Continuous-time limit of the q-binomial CRR market.

Contents:
    normal_cdf, normal_pdf: standard normal kernels (erfc based).
    short_rate: time-dependent risk-free rate r_t.
    limit_discount: exp(-int_0^T r_t dt) in closed form.
    LimitLaw, limit_log_law: Gaussian law of log S_t.
    bs_d1_d2, bs_call_limit: Black-Scholes type call price of the limit model.

The eta-terms carry the factor (Tq/T)^{3/2}, which equals one when the trend
timescale Tq inside q_N coincides with the maturity T.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from qlattice.errors import ParameterError

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def normal_cdf(x):
    """Phi(x) = erfc(-x/sqrt(2))/2, accurate in both tails."""
    return 0.5 * erfc(-np.asarray(x, dtype=np.float64) / SQRT2)


def normal_pdf(x):
    x = np.asarray(x, dtype=np.float64)
    return INV_SQRT_2PI * np.exp(-0.5 * x * x)


def _trend_scale(params):
    return (params.Tq / params.T) ** 1.5


def _trend_coefficient(params):
    # sigma eta sqrt(theta)/(1 + theta), scaled to the Tq timescale
    return (params.sigma * params.eta * math.sqrt(params.theta)
            / (1.0 + params.theta) * _trend_scale(params))


@dataclass(frozen=True)
class LimitLaw:
    mean_log: float
    var_log: float
    t: float


def short_rate(t, params):
    """r_t = zeta sigma^2/2 + sigma eta sqrt(theta) t/(1 + theta)."""
    if t < 0:
        raise ParameterError(f"t must be >= 0, got {t}")
    return 0.5 * params.effective_zeta * params.sigma**2 + _trend_coefficient(params) * t


def integrated_rate(params, t=None):
    """int_0^t r_s ds, t defaulting to the maturity."""
    t = params.T if t is None else t
    return (0.5 * params.effective_zeta * params.sigma**2 * t
            + 0.5 * _trend_coefficient(params) * t**2)


def limit_discount(params):
    return math.exp(-integrated_rate(params))


def limit_log_law(t, params):
    """
    log S_t ~ N(log S0 + sigma eta sqrt(theta) t^2/(2(1+theta))
                - (1 - zeta) sigma^2 t/2,  sigma^2 t).
    """
    if not 0 <= t <= params.T * (1 + 1e-12):
        raise ParameterError(f"t={t} outside [0, T={params.T}]")
    mean = (math.log(params.S0) + 0.5 * _trend_coefficient(params) * t**2
            - 0.5 * (1.0 - params.effective_zeta) * params.sigma**2 * t)
    return LimitLaw(mean_log=mean, var_log=params.sigma**2 * t, t=t)


def bs_d1_d2(params):
    if not params.K > 0:
        raise ParameterError(f"limit call price needs K > 0, got {params.K}")
    vol = params.sigma * math.sqrt(params.T)
    d1 = (math.log(params.S0 / params.K) + integrated_rate(params) + 0.5 * vol**2) / vol
    return d1, d1 - vol


def bs_call_limit(params):
    """
    S0 Phi(d1) - K exp(-int_0^T r_t dt) Phi(d2), with
    d1 = (log(S0/K) + (1+zeta) sigma^2 T/2 + sigma eta T^2 sqrt(theta)/(2(1+theta)))/(sigma sqrt(T)).
    """
    d1, d2 = bs_d1_d2(params)
    return float(params.S0 * normal_cdf(d1)
                 - params.K * limit_discount(params) * normal_cdf(d2))
