"""
Monte Carlo validation of the terminal count Z_N: determinism, CLT variance,
martingale property and the chi-square fit to the Kemp pmf.
"""
import math
import numpy as np
import pytest

from qlattice.errors import ParameterError
from qlattice.lattice import ModelParams
from qlattice.mc import (
    MC_BLOCK_PATHS, SE_BAND, sample, block_generator, clt_check,
    martingale_check, empirical_pmf, chi_square_check
)


def market(**kwargs):
    base = dict(S0=100, K=95, sigma=0.2, T=0.5, theta=1.0, eta=0.0, N=200, Tq=1.0)
    base.update(kwargs)
    return ModelParams(**base)


def test_same_seed_same_batch():
    params = market(eta=1.0, N=64)
    n_paths = 2 * MC_BLOCK_PATHS + 17
    a = sample(params, [0.25, 0.5], n_paths, seed=7)
    b = sample(params, [0.25, 0.5], n_paths, seed=7)
    c = sample(params, [0.25, 0.5], n_paths, seed=7, nworkers=2)
    assert np.array_equal(a.terminal_Z, b.terminal_Z)
    assert np.array_equal(a.terminal_Z, c.terminal_Z)
    for n in a.indices:
        assert np.array_equal(a.log_prices_at[n], c.log_prices_at[n])

    d = sample(params, [0.5], n_paths, seed=8)
    assert not np.array_equal(a.terminal_Z, d.terminal_Z)


def test_block_streams_differ():
    x = block_generator(3, 0).random(8)
    y = block_generator(3, 1).random(8)
    assert not np.array_equal(x, y)
    assert np.array_equal(x, block_generator(3, 0).random(8))


def test_batch_shape_and_range():
    params = market(N=50)
    batch = sample(params, [0.0, 0.5], 3000, seed=1)
    assert batch.terminal_Z.shape == (3000,)
    assert batch.terminal_Z.min() >= 0
    assert batch.terminal_Z.max() <= 50
    assert batch.indices == (0, 50)
    assert np.all(batch.log_prices_at[0] == math.log(100))
    assert empirical_pmf(batch).sum() == pytest.approx(1.0, abs=1e-12)


def test_symmetric_coin_mean():
    params = market(N=100)
    batch = sample(params, [], 20000, seed=11)
    z = batch.terminal_Z.astype(float)
    se = z.std() / math.sqrt(z.shape[0])
    assert abs(z.mean() - 50.0) <= SE_BAND * se


@pytest.mark.parametrize("theta,target", [(1.0, 0.25), (2.0, 2.0 / 9.0)])
def test_clt_with_trend(theta, target):
    params = market(theta=theta, eta=1.0, N=1000)
    result = clt_check(sample(params, [], 100000, seed=2024), params)
    assert result['target_var'] == pytest.approx(target, rel=1e-15)
    assert result['relative_var_deviation'] <= 0.03
    assert abs(result['z_mean']) <= SE_BAND
    assert result['passed']


def test_martingale():
    params = market(theta=1.1, eta=-1.0, N=300)
    result = martingale_check(sample(params, [], 40000, seed=5), params)
    assert result['passed']
    assert result['se_mean'] > 0


def test_chi_square_small_lattice():
    params = market(theta=1.3, eta=1.0, N=10)
    result = chi_square_check(sample(params, [], 200000, seed=123), params)
    assert not result['flagged']
    assert result['dof'] >= 1


def test_invalid_requests():
    params = market(N=10)
    with pytest.raises(ParameterError):
        sample(params, [0.5], 0, seed=1)
    with pytest.raises(ParameterError):
        sample(params, [0.6], 10, seed=1)
    with pytest.raises(ParameterError):
        sample(params, [0.4, 0.2], 10, seed=1)
    with pytest.raises(ParameterError):
        sample(params, [0.5], 10, seed=-1)


if __name__ == "__main__":
    test_same_seed_same_batch()
    test_clt_with_trend(1.0, 0.25)
    test_chi_square_small_lattice()
