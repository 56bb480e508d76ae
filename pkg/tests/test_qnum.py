"""
q-arithmetic: q-integers, Gaussian binomials, rising products.
"""
import math
import numpy as np
import pytest
from scipy.special import logsumexp

from qlattice.errors import ParameterError
from qlattice.qnum import (
    QValue, q_integer, log_q_integer, log_q_binomial, log_q_binomial_row,
    q_binomial, log_q_factorials, log_rising_product, compensated_cumsum
)


def test_q_integer():
    assert q_integer(0, 1.3) == 0.0
    assert q_integer(5, 1.0) == 5.0
    assert q_integer(3, 2.0) == pytest.approx(7.0, rel=1e-15)
    assert q_integer(4, 0.5) == pytest.approx(1.875, rel=1e-15)
    assert np.exp(log_q_integer(3, 2.0)) == pytest.approx(7.0, rel=1e-14)
    assert log_q_integer(0, 0.9) == -np.inf


def test_small_q_binomials():
    # (4 choose 2)_2 = 15 * 7 / (3 * 1)
    assert q_binomial(4, 2, 2.0) == pytest.approx(35.0, rel=1e-13)
    assert q_binomial(5, 2, 1.0) == pytest.approx(10.0, rel=1e-13)
    assert q_binomial(6, 0, 1.7) == 1.0
    assert q_binomial(6, 7, 1.7) == 0.0
    assert log_q_binomial(6, -1, 1.7) == -np.inf


def test_linear_accessor_capped():
    with pytest.raises(ParameterError):
        q_binomial(61, 30, 1.01)


@pytest.mark.parametrize("q", [0.5, 0.97, 1.0, 1.03, 2.0])
def test_symmetry(q):
    for n, k in [(10, 3), (50, 13), (301, 100)]:
        assert log_q_binomial(n, k, q) == log_q_binomial(n, n - k, q)


@pytest.mark.parametrize("q", [0.97, 1.0, 1.03])
def test_row_matches_elementwise(q):
    n = 200
    row = log_q_binomial_row(n, q)
    direct = np.array([log_q_binomial(n, k, q) for k in range(n + 1)])
    assert row[0] == 0.0
    assert np.allclose(row, direct, rtol=1e-10, atol=1e-9)


np.random.seed(7)
IDENTITY_ARGS = []
for _ in range(200):
    n = int(np.random.randint(1, 31))
    IDENTITY_ARGS.append((n, int(np.random.randint(1, n + 1)),
                          float(np.exp(np.random.uniform(np.log(0.1), np.log(10.0)))),
                          float(np.random.uniform(0.5, 2.0))))


@pytest.mark.parametrize("n,k,theta,q", IDENTITY_ARGS)
def test_q_pascal_rule(n, k, theta, q):
    # (n+1 choose k)_q = (n choose k)_q + q^{n-k+1} (n choose k-1)_q
    lhs = q_binomial(n + 1, k, q)
    rhs = q_binomial(n, k, q) + q ** (n - k + 1) * q_binomial(n, k - 1, q)
    assert lhs == pytest.approx(rhs, rel=1e-9)


@pytest.mark.parametrize("n,k,theta,q", IDENTITY_ARGS)
def test_gauss_binomial_formula(n, k, theta, q):
    # sum_k theta^k q^{k(k-1)/2} (n choose k)_q = prod_{l=1..n}(1 + theta q^{l-1})
    j = np.arange(n + 1)
    terms = (0.5 * j * (j - 1) * math.log(q) + log_q_binomial_row(n, q)
             + j * math.log(theta))
    # a log-scale difference of 1e-9 is a relative error of 1e-9
    assert abs(logsumexp(terms) - log_rising_product(n, theta, q)) <= 1e-9


def test_q_near_one_is_classical():
    q = 1.0 + 1e-9
    for n in range(51):
        for k in range(n + 1):
            exact = math.comb(n, k)
            assert abs(math.exp(log_q_binomial(n, k, q)) - exact) <= 1e-6 * exact
    q = 1.0 + 1e-14
    classical = math.lgamma(101) - 2 * math.lgamma(51)
    assert log_q_binomial(100, 50, q) == pytest.approx(classical, abs=1e-9)


def test_large_n_row_finite():
    n = 20000
    q = 1.0 + (0.5 / n) ** 1.5
    row = log_q_binomial_row(n, q)
    assert np.all(np.isfinite(row))
    assert row[0] == 0.0
    assert abs(row[-1]) < 1e-6 * abs(row[n // 2])


def test_log_q_factorials():
    lf = log_q_factorials(8, 1.0)
    assert lf.shape == (9,)
    for j in range(9):
        assert lf[j] == pytest.approx(math.lgamma(j + 1), abs=1e-12)
    # [3]_2! = 1 * 3 * 7
    assert np.exp(log_q_factorials(3, 2.0)[-1]) == pytest.approx(21.0, rel=1e-13)


def test_compensated_cumsum():
    x = np.full(10**6, 0.1)
    out = compensated_cumsum(x)
    assert out[0] == 0.0
    assert abs(out[-1] - 1e5) < 1e-8


def test_invalid_q():
    for bad in [0.0, -1.0, np.inf, np.nan]:
        with pytest.raises(ParameterError):
            QValue(bad)
    assert QValue(1.0).is_one
    assert not QValue(1.0 + 1e-12).is_one


if __name__ == "__main__":
    test_q_integer()
    test_small_q_binomials()
    for args in IDENTITY_ARGS[:10]:
        test_q_pascal_rule(*args)
        test_gauss_binomial_formula(*args)
    test_q_near_one_is_classical()
    test_large_n_row_finite()
    test_log_q_factorials()
    test_compensated_cumsum()
