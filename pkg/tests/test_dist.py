"""
Kemp distribution of Z_n and the q-geometric default time.
"""
import itertools
import math
import numpy as np
import pandas as pd
import pytest
from scipy.stats import binom

from qlattice.errors import ParameterError, TableSizeError
from qlattice.dist import (
    KempParams, switch_prob, complement_prob, switch_probs, kemp_log_pmf,
    kemp_log_pmf_vector, kemp_pmf_table, kemp_cdf, kemp_tail, kemp_moments,
    kemp_pgf, count_inversions, word_probability, qgeom_survival, qgeom_pmf,
    failure_rate, failure_curve
)
from qlattice.paths import TESTRESULTSDIR

np.random.seed(42)
args = [(int(n), float(theta), float(q)) for n, theta, q in zip(
    np.random.randint(1, 400, size=12),
    np.exp(np.random.uniform(-1.5, 1.5, size=12)),
    np.exp(np.random.uniform(-0.05, 0.05, size=12)),
)]


@pytest.mark.parametrize("n,theta,q", args)
def test_pmf_normalized(n, theta, q):
    probs = np.exp(kemp_log_pmf_vector(KempParams(n, theta, q)))
    assert math.fsum(probs) == pytest.approx(1.0, abs=1e-10)
    assert np.all(probs >= 0)


@pytest.mark.parametrize("n,theta,q", args[:6])
def test_table_matches_closed_form(n, theta, q):
    params = KempParams(n, theta, q)
    table = kemp_pmf_table(params)
    assert np.allclose(table.probs, np.exp(kemp_log_pmf_vector(params)), atol=1e-12, rtol=1e-9)
    assert np.all(np.isfinite(table.log_probs))


def test_symmetric_coin():
    probs = kemp_pmf_table(KempParams(4, 1.0, 1.0)).probs
    assert np.allclose(probs, np.array([1, 4, 6, 4, 1]) / 16, atol=1e-15)


def test_q_one_is_binomial():
    n, theta = 37, 1.7
    probs = np.exp(kemp_log_pmf_vector(KempParams(n, theta, 1.0)))
    assert np.allclose(probs, binom.pmf(np.arange(n + 1), n, theta / (1 + theta)),
                       atol=1e-13)


def test_edge_cases():
    params = KempParams(0, 2.0, 0.9)
    assert kemp_pmf_table(params).probs.tolist() == [1.0]
    params = KempParams(10, 2.0, 0.9)
    assert kemp_log_pmf(params, -1) == -np.inf
    assert kemp_log_pmf(params, 11) == -np.inf
    assert kemp_tail(params, 0) == 1.0
    assert kemp_tail(params, 11) == 0.0
    with pytest.raises(ParameterError):
        KempParams(-1, 1.0, 1.0)
    with pytest.raises(ParameterError):
        KempParams(5, 0.0, 1.0)


def test_table_cap():
    with pytest.raises(TableSizeError):
        kemp_pmf_table(KempParams(100, 1.0, 1.0), cap=50)


def test_switch_probs():
    assert switch_prob(1, 3.0, 0.7) == pytest.approx(0.75, rel=1e-15)
    for k in [1, 2, 50, 800]:
        for theta, q in [(0.3, 1.01), (5.0, 0.99), (1.0, 1.0)]:
            assert switch_prob(k, theta, q) + complement_prob(k, theta, q) == 1.0
    p, c = switch_probs(1000, 1.3, 1.02)
    assert np.all(p + c == 1.0)
    assert np.all(np.diff(p) > 0)
    with pytest.raises(ParameterError):
        switch_prob(0, 1.0, 1.0)


def test_moments():
    mean, var = kemp_moments(KempParams(10, 1.0, 1.0))
    assert mean == pytest.approx(5.0, rel=1e-15)
    assert var == pytest.approx(2.5, rel=1e-15)

    params = KempParams(60, 0.8, 1.03)
    probs = np.exp(kemp_log_pmf_vector(params))
    k = np.arange(61)
    mean, var = kemp_moments(params)
    assert mean == pytest.approx(np.sum(k * probs), rel=1e-10)
    assert var == pytest.approx(np.sum((k - mean) ** 2 * probs), rel=1e-9)


def test_cdf_and_tail():
    params = KempParams(30, 1.2, 0.98)
    cdf = kemp_cdf(params)
    assert cdf[-1] == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(cdf) >= 0)
    for m in [1, 10, 20, 30]:
        assert kemp_tail(params, m) == pytest.approx(1.0 - cdf[m - 1], abs=1e-12)


def test_pgf():
    params = KempParams(25, 0.9, 1.04)
    assert kemp_pgf(params, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert kemp_pgf(params, 0.0) == pytest.approx(math.exp(kemp_log_pmf(params, 0)), rel=1e-12)

    # E[t^Z] from the pmf
    probs = np.exp(kemp_log_pmf_vector(params))
    t = 0.6
    assert kemp_pgf(params, t) == pytest.approx(np.sum(probs * t ** np.arange(26)), rel=1e-12)

    theta, n = 1.5, 12
    assert kemp_pgf(KempParams(n, theta, 1.0), t) == pytest.approx(
        ((1 + theta * t) / (1 + theta)) ** n, rel=1e-13)
    with pytest.raises(ParameterError):
        kemp_pgf(params, 2.0)


def test_inversions():
    assert count_inversions([0, 0, 1, 1]) == 4
    assert count_inversions([1, 1, 0, 0]) == 0
    assert count_inversions([0, 1, 0, 1]) == 3
    assert count_inversions([]) == 0


def test_word_probabilities_sum_to_pmf():
    n, theta, q = 6, 0.8, 1.3
    params = KempParams(n, theta, q)
    probs = kemp_pmf_table(params).probs
    by_k = np.zeros(n + 1)
    for word in itertools.product([0, 1], repeat=n):
        by_k[sum(word)] += word_probability(word, theta, q)
    assert math.fsum(by_k) == pytest.approx(1.0, abs=1e-13)
    assert np.allclose(by_k, probs, atol=1e-13)


@pytest.mark.parametrize("theta,q", list(itertools.product([0.5, 1.0, 2.0], [0.9, 1.0, 1.1])))
def test_table_matches_path_enumeration(theta, q):
    for n in range(13):
        table = kemp_pmf_table(KempParams(n, theta, q)).probs
        if n == 0:
            assert table.tolist() == [1.0]
            continue
        words = np.array(list(itertools.product([0, 1], repeat=n)))
        p, c = switch_probs(n, theta, q)
        path_probs = np.prod(np.where(words == 1, p, c), axis=1)
        by_k = np.bincount(words.sum(axis=1), weights=path_probs, minlength=n + 1)
        assert np.max(np.abs(table - by_k)) <= 1e-12, (n, theta, q)


def test_table_normalized_at_ten_thousand():
    n = 10_000
    table = kemp_pmf_table(KempParams(n, 1.1, 1.0 + (1.0 / n) ** 1.5))
    assert abs(math.fsum(table.probs) - 1.0) <= 1e-10
    assert np.all(np.isfinite(table.log_probs))


def test_qgeom_fair_coin():
    for k in range(1, 8):
        assert qgeom_survival(k, 1.0, 1.0) == pytest.approx(0.5 ** (k - 1), rel=1e-14)
        assert qgeom_pmf(k, 1.0, 1.0) == pytest.approx(0.5**k, rel=1e-14)
        assert failure_rate(k, 1.0, 1.0) == 0.5


def test_qgeom_telescopes():
    theta, q, kmax = 2.0, 0.97, 40
    total = math.fsum(qgeom_pmf(k, theta, q) for k in range(1, kmax + 1))
    assert total + qgeom_survival(kmax + 1, theta, q) == pytest.approx(1.0, abs=1e-12)


def test_failure_curve():
    df = failure_curve(5, 1.0, 1.0)
    assert list(df.columns) == ['k', 'survival', 'pmf', 'hazard']
    assert df['k'].tolist() == [1, 2, 3, 4, 5]
    assert np.all(df['hazard'].values == 0.5)

    # q > 1: hazard decreasing in k; q < 1: increasing
    up = failure_curve(50, 1.0, 1.05)['hazard'].values
    down = failure_curve(50, 1.0, 0.95)['hazard'].values
    assert np.all(np.diff(up) < 0)
    assert np.all(np.diff(down) > 0)

    df = failure_curve(60, 1.5, 1.02)
    df.to_csv(f"{TESTRESULTSDIR}/failure_curve_theta1.5_q1.02.csv", index=False)
    with pytest.raises(ParameterError):
        failure_curve(0, 1.0, 1.0)


def test_large_n_closed_form():
    n = 20000
    params = KempParams(n, 1.1, 1.0 + (0.5 / n) ** 1.5)
    log_pmf = kemp_log_pmf_vector(params)
    assert np.all(np.isfinite(log_pmf))
    assert math.fsum(np.exp(log_pmf)) == pytest.approx(1.0, abs=1e-9)


if __name__ == "__main__":
    test_symmetric_coin()
    test_q_one_is_binomial()
    test_moments()
    test_pgf()
    test_word_probabilities_sum_to_pmf()
    test_failure_curve()
    test_large_n_closed_form()
