"""
The q-binomial CRR market and its European pricers.

Contents:

Market description:
    ModelParams: one q-CRR market (spot, strike, vol, maturity, theta, zeta, eta, N).
    StepSchedule: per-step a_N, b_N, q_N, switching probabilities and rates.
    build_schedule: derive the StepSchedule of a ModelParams.
    one_step_moments: mean and variance of S_k/S_{k-1}.
    bond_price, theta_N, call_cutoff, terminal_prices

Payoffs:
    call_payoff, put_payoff, unit_payoff, identity_payoff

Pricers (mutually cross-checking):
    price_european_closed: q-binomial sum at time 0, O(N).
    price_at: the same sum started at time n from a given spot.
    price_backward: discounted expectation step by step on the lattice, O(N^2).
    price_call_dual: S0 P_{theta_N}(Z_N >= m) - K B P_theta(Z_N >= m).
    price_crr_textbook: independent plain CRR pricer (q = 1, theta = 1 oracle).

Checks:
    martingale_residual: max_n |E[S_n]/A_n - S0| / S0 computed from the pmf.
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
from dataclasses import dataclass, replace

import numba
import numpy as np

from qlattice.errors import ParameterError
from qlattice.qnum import QValue, as_qvalue, log_q_binomial_row
from qlattice.dist import KempParams, kemp_tail, switch_probs

SCHEDULE_MODES = ('polynomial', 'exponential')

# nodes within this relative distance of the strike do not count as "above K"
BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """
    One q-CRR market.

    S0, K: spot and strike (currency).  sigma: volatility per sqrt(year).
    T: maturity (years).  theta: stretch.  zeta: tilt.  eta: trend.
    N: number of steps.  Tq: timescale inside q_N = 1 + eta (Tq/N)^{3/2}
    (defaults to T).  schedule_mode: 'polynomial' or 'exponential'.
    """
    S0: float
    K: float
    sigma: float
    T: float
    theta: float = 1.0
    zeta: float = 1.0
    eta: float = 0.0
    N: int = 100
    Tq: float = None
    schedule_mode: str = 'exponential'

    def __post_init__(self):
        if self.Tq is None:
            object.__setattr__(self, 'Tq', self.T)
        checks = [
            ('S0', self.S0 > 0, 'S0 > 0'),
            ('K', self.K >= 0, 'K >= 0'),
            ('sigma', self.sigma > 0, 'sigma > 0'),
            ('T', self.T > 0, 'T > 0'),
            ('theta', self.theta > 0, 'theta > 0'),
            ('Tq', self.Tq > 0, 'Tq > 0'),
            ('N', int(self.N) == self.N and self.N >= 1, 'integer N >= 1'),
        ]
        for name, ok, bound in checks:
            if not ok:
                raise ParameterError(f"{name}={getattr(self, name)} violates {bound}")
        for name in ('S0', 'K', 'sigma', 'T', 'theta', 'zeta', 'eta', 'Tq'):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        object.__setattr__(self, 'N', int(self.N))
        if self.schedule_mode not in SCHEDULE_MODES:
            raise ParameterError(
                f"schedule_mode must be one of {SCHEDULE_MODES}, got {self.schedule_mode!r}"
            )

    @property
    def effective_zeta(self):
        """The exponential schedule matches zeta = 1 to O(dt)."""
        if self.schedule_mode == 'exponential':
            return 1.0
        return self.zeta

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class StepSchedule:
    a: float
    b: float
    qN: QValue
    dt: float
    rates: np.ndarray
    switch_probs: np.ndarray
    complement_probs: np.ndarray
    theta: float
    log_a: float
    log_b: float

    @property
    def N(self):
        return self.rates.shape[0]

    @classmethod
    def from_factors(cls, a, b, theta, q, N, dt=1.0, am1=None, bm1=None):
        """
        Schedule from hand-set factors.  am1 = a - 1 and bm1 = b - 1 may be
        passed when they are known more accurately than by subtraction.
        """
        q = as_qvalue(q)
        am1 = a - 1.0 if am1 is None else am1
        bm1 = b - 1.0 if bm1 is None else bm1
        p, c = switch_probs(N, theta, q)
        # 1 + r_k = a c_k + b p_k, and c_k + p_k == 1 exactly
        rates = am1 * c + bm1 * p
        return cls(a=a, b=b, qN=q, dt=dt, rates=rates, switch_probs=p,
                   complement_probs=c, theta=float(theta),
                   log_a=math.log1p(am1), log_b=math.log1p(bm1))


def build_schedule(params):
    """
    a_N, b_N and q_N for the market in `params`.

    polynomial:  a = 1 - s sqrt(theta) + zeta s^2 theta/2,
                 b = 1 + s/sqrt(theta) + zeta s^2/(2 theta),  s = sigma sqrt(dt)
    exponential: a = exp(-s sqrt(theta)),  b = exp(s/sqrt(theta))
    both:        q_N = 1 + eta (Tq/N)^{3/2}
    """
    sigma, theta, zeta = params.sigma, params.theta, params.zeta
    N = params.N
    dt = params.T / N
    down = sigma * math.sqrt(theta * dt)
    up = sigma * math.sqrt(dt / theta)

    if params.schedule_mode == 'polynomial':
        if not down < 1:
            raise ParameterError(
                f"polynomial schedule needs sigma*sqrt(theta*dt) < 1, got {down:.6g} (N={N})"
            )
        am1 = -down + 0.5 * zeta * sigma**2 * theta * dt
        bm1 = up + 0.5 * zeta * sigma**2 * dt / theta
    else:
        am1 = math.expm1(-down)
        bm1 = math.expm1(up)
    a, b = 1.0 + am1, 1.0 + bm1

    if not a > 0:
        raise ParameterError(f"a_N = {a:.6g} must be > 0 (N={N})")
    if not (a < 1 < b):
        raise ParameterError(f"need 0 < a_N < 1 < b_N, got a_N={a:.6g}, b_N={b:.6g} (N={N})")

    qN = 1.0 + params.eta * (params.Tq / N) ** 1.5
    if not qN > 0:
        raise ParameterError(f"q_N = {qN:.6g} must be > 0 (eta={params.eta}, N={N})")

    LOGDEBUG(f"schedule N={N}: a={a:.10f} b={b:.10f} qN={qN:.12f}")
    return StepSchedule.from_factors(a, b, theta, QValue(qN), N, dt=dt, am1=am1, bm1=bm1)


def _schedule(params, sched):
    return build_schedule(params) if sched is None else sched


def one_step_moments(sched, theta, k):
    """
    E[S_k/S_{k-1}] = (a + b theta q^{k-1})/(1 + theta q^{k-1}) and
    Var[S_k/S_{k-1}] = (b - a)^2 theta q^{k-1}/(1 + theta q^{k-1})^2.
    """
    if k < 1:
        raise ParameterError(f"step index must be >= 1, got {k}")
    p, c = switch_probs(1, theta, sched.qN, start=k)
    p, c = float(p[0]), float(c[0])
    mean = sched.a * c + sched.b * p
    var = (sched.b - sched.a) ** 2 * p * c
    return mean, var


def bond_price(sched, start=0):
    """prod_{k=start+1..N} (1 + r_k)^{-1}."""
    return math.exp(-math.fsum(np.log1p(sched.rates[start:])))


def theta_N(sched, theta=None):
    """theta b_N / a_N from the constructed schedule."""
    theta = sched.theta if theta is None else theta
    return theta * sched.b / sched.a


def terminal_prices(params, sched=None):
    """S0 b^k a^{N-k}, k = 0..N, formed in log space."""
    sched = _schedule(params, sched)
    N = sched.N
    k = np.arange(N + 1)
    return np.exp(math.log(params.S0) + k * sched.log_b + (N - k) * sched.log_a)


def call_payoff(K):
    def payoff(s):
        return np.maximum(np.asarray(s, dtype=np.float64) - K, 0.0)
    return payoff


def put_payoff(K):
    def payoff(s):
        return np.maximum(K - np.asarray(s, dtype=np.float64), 0.0)
    return payoff


def unit_payoff():
    def payoff(s):
        return np.ones_like(np.asarray(s, dtype=np.float64))
    return payoff


def identity_payoff():
    def payoff(s):
        return np.asarray(s, dtype=np.float64)
    return payoff


def _discounted_expectation(sched, n, spot, payoff):
    """
    prod_{k=n+1..N}(1+r_k)^{-1} E[phi(S_N) | S_n = spot]

      = sum_{k=0..N-n} theta^k q^{k(2n+k-1)/2} phi(spot b^k a^{N-n-k}) (N-n choose k)_q
                       / prod_{l=n..N-1}(a + theta b q^l)
    """
    N = sched.N
    steps = N - n
    q = sched.qN
    L = q.log1p_q
    k = np.arange(steps + 1, dtype=np.float64)

    # prod_{l=n..N-1}(a + theta b q^l) = a^{steps} prod (1 + theta_N q^l)
    l = np.arange(n, N, dtype=np.float64)
    log_den = steps * sched.log_a + math.fsum(
        np.logaddexp(0.0, math.log(theta_N(sched)) + l * L)
    )
    log_w = (k * (math.log(sched.theta) + n * L) + 0.5 * k * (k - 1.0) * L
             + log_q_binomial_row(steps, q) - log_den)

    log_s = math.log(spot) + k * sched.log_b + (steps - k) * sched.log_a
    values = np.asarray(payoff(np.exp(log_s)), dtype=np.float64)
    return math.fsum(np.exp(log_w) * values)


def price_european_closed(params, payoff, sched=None):
    """Arbitrage-free time-0 price of phi(S_N) from the q-binomial sum."""
    sched = _schedule(params, sched)
    return _discounted_expectation(sched, 0, params.S0, payoff)


def price_at(params, n, spot_n, payoff, sched=None):
    """Arbitrage-free price at time n given S_n = spot_n."""
    sched = _schedule(params, sched)
    N = sched.N
    if not 0 <= n <= N:
        raise IndexError(f"time index n={n} outside 0..{N}")
    if not spot_n > 0:
        raise ParameterError(f"spot at time n must be > 0, got {spot_n}")
    if n == N:
        return float(np.asarray(payoff(np.array([spot_n])))[0])
    return _discounted_expectation(sched, n, spot_n, payoff)


@numba.njit
def _backward_induction(values, p, c, growth):
    # values[j] holds the node with j up-moves; overwritten level by level
    N = p.shape[0]
    for k in range(N, 0, -1):
        pk = p[k - 1]
        ck = c[k - 1]
        gk = growth[k - 1]
        for j in range(k):
            values[j] = (pk * values[j + 1] + ck * values[j]) / gk
    return values[0]


def price_backward(params, payoff, sched=None):
    """Backward induction V_{k-1} = (p_k V_k^up + (1-p_k) V_k^down)/(1 + r_k)."""
    sched = _schedule(params, sched)
    values = np.array(payoff(terminal_prices(params, sched)), dtype=np.float64)
    return float(_backward_induction(
        values, sched.switch_probs, sched.complement_probs, 1.0 + sched.rates
    ))


def call_cutoff(params, sched=None):
    """
    Smallest m with S0 b^m a^{N-m} > K, clamped to 0..N+1, and
    eps_N = m - log(K/(S0 a^N))/log(b/a).

    Nodes within BOUNDARY_RTOL*K of the strike are treated as not exceeding it.
    """
    sched = _schedule(params, sched)
    N = sched.N
    if not params.K > 0:
        raise ParameterError(f"call cutoff needs K > 0, got {params.K}")
    log_ratio = sched.log_b - sched.log_a
    x = (math.log(params.K / params.S0) - N * sched.log_a) / log_ratio
    m = int(min(max(math.floor(x) + 1, 0), N + 1))

    threshold = math.log(params.K) + math.log1p(BOUNDARY_RTOL)

    def node(j):
        return math.log(params.S0) + j * sched.log_b + (N - j) * sched.log_a

    while m - 1 >= 0 and node(m - 1) > threshold:
        m -= 1
    while m <= N and node(m) <= threshold:
        m += 1
    return m, m - x


def price_call_dual(params, sched=None):
    """Call price as S0 P_{theta_N,q_N}(Z_N >= m) - K B P_{theta,q_N}(Z_N >= m)."""
    sched = _schedule(params, sched)
    m, _ = call_cutoff(params, sched)
    N = sched.N
    upper = kemp_tail(KempParams(N, theta_N(sched), sched.qN), m)
    lower = kemp_tail(KempParams(N, sched.theta, sched.qN), m)
    return params.S0 * upper - params.K * bond_price(sched) * lower


def price_crr_textbook(S0, K, sigma, T, r, N, kind='call'):
    """
    Plain Cox-Ross-Rubinstein price with u = exp(sigma sqrt(dt)), d = 1/u and
    continuously compounded rate r.
    """
    dt = T / N
    s = sigma * math.sqrt(dt)
    u = math.exp(s)
    d = 1.0 / u
    # (e^{r dt} - d)/(u - d) with every difference taken through expm1
    p = (math.expm1(r * dt) - math.expm1(-s)) / (math.expm1(s) - math.expm1(-s))
    disc = math.exp(-r * dt)

    ST = S0 * u ** np.arange(N + 1) * d ** (N - np.arange(N + 1))
    if kind == 'call':
        values = np.maximum(ST - K, 0.0)
    elif kind == 'put':
        values = np.maximum(K - ST, 0.0)
    else:
        raise ParameterError(f"kind must be 'call' or 'put', got {kind!r}")

    for i in range(N - 1, -1, -1):
        values = disc * (p * values[1:i + 2] + (1.0 - p) * values[:i + 1])
    return float(values[0])


@numba.njit
def _martingale_kernel(p, c, log_a, log_b, log_growth):
    N = p.shape[0]
    probs = np.zeros(N + 1)
    probs[0] = 1.0
    worst = 0.0
    log_acc = 0.0
    comp = 0.0
    for n in range(1, N + 1):
        pj = p[n - 1]
        cj = c[n - 1]
        probs[n] = probs[n - 1] * pj
        for k in range(n - 1, 0, -1):
            probs[k] = probs[k] * cj + probs[k - 1] * pj
        probs[0] = probs[0] * cj

        # Kahan accumulation of log A_n
        y = log_growth[n - 1] - comp
        t = log_acc + y
        comp = (t - log_acc) - y
        log_acc = t

        s = 0.0
        sc = 0.0
        for k in range(n + 1):
            term = probs[k] * np.exp(k * log_b + (n - k) * log_a - log_acc)
            y = term - sc
            t = s + y
            sc = (t - s) - y
            s = t
        dev = abs(s - 1.0)
        if dev > worst:
            worst = dev
    return worst


def martingale_residual(params, sched=None):
    """
    max_{n=1..N} |E[S_n prod_{k<=n}(1+r_k)^{-1}] - S0| / S0, with each
    expectation summed over the pmf of Z_n.
    """
    sched = _schedule(params, sched)
    return float(_martingale_kernel(
        sched.switch_probs, sched.complement_probs,
        sched.log_a, sched.log_b, np.log1p(sched.rates)
    ))
