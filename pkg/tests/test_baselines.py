import numpy as np
import pytest

from cbq.embeddings import EmbeddingPair
from cbq.errors import CapExceeded, DimensionMismatch, EmbeddingMismatch, EmptyInput, RankDeficient
from cbq.kernels import GaussianRbf, Matern32
from cbq.measures import Gaussian
from cbq.quadrature import bq_fit, is_estimate, klsmc_fit, klsmc_predict, lsmc_fit, lsmc_predict, mc_estimate, \
    mobq_estimate, mobq_fit, mobq_predict, monomial_powers


def test_mc_estimate():
    assert mc_estimate([1.0, 2.0, 6.0]) == pytest.approx(3.0)
    with pytest.raises(EmptyInput):
        mc_estimate([])


def test_is_with_matching_densities():
    f = np.full((3, 4), 2.5)
    log_density = np.zeros((3, 4))
    assert is_estimate(f, log_density, log_density) == pytest.approx(2.5)
    assert is_estimate(f, log_density, log_density, normalized=False) == pytest.approx(2.5 * 4)


def test_is_reweights_samples():
    f = np.array([[1.0, 3.0]])
    log_p = np.log([[0.5, 0.25]])
    log_q = np.log([[0.25, 0.25]])
    assert is_estimate(f, log_p, log_q) == pytest.approx((2 * 1.0 + 3.0) / 2)


def test_is_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        is_estimate(np.zeros((2, 3)), np.zeros((2, 3)), np.zeros((3, 2)))


def test_monomial_powers():
    assert monomial_powers(2, 2) == [(), (0,), (1,), (0, 0), (0, 1), (1, 1)]
    assert len(monomial_powers(3, 4)) == 35


def quadratic(thetas):
    a, b = thetas[:, 0], thetas[:, 1]
    return 1 + 2 * a - b + 0.5 * a * b + b ** 2


def test_lsmc_recovers_a_quadratic():
    rng = np.random.default_rng(3)
    thetas = rng.uniform(-1, 2, size=(20, 2))
    model = lsmc_fit(thetas, quadratic(thetas), order=2)
    star = rng.uniform(-1, 2, size=(5, 2))
    assert np.allclose(lsmc_predict(model, star), quadratic(star), atol=1e-8)


def test_lsmc_is_affine_invariant():
    rng = np.random.default_rng(4)
    thetas = rng.uniform(0, 1, size=(15, 1))
    y = np.exp(thetas[:, 0]) + 0.1 * rng.standard_normal(15)
    star = np.array([[0.2], [0.7]])
    plain = lsmc_predict(lsmc_fit(thetas, y, order=3), star)
    shifted = lsmc_predict(lsmc_fit(3 * thetas + 1, y, order=3), 3 * star + 1)
    assert np.allclose(plain, shifted, atol=1e-8)


def test_lsmc_needs_enough_parameters():
    thetas = np.random.default_rng(0).uniform(size=(5, 2))
    with pytest.raises(RankDeficient):
        lsmc_fit(thetas, np.ones(5), order=2)
    lsmc_fit(thetas, np.arange(5.0), order=2, ridge=0.1)


def test_lsmc_order_and_ridge_checks():
    thetas = np.linspace(0, 1, 10)[:, None]
    with pytest.raises(ValueError):
        lsmc_fit(thetas, thetas[:, 0], order=5)
    with pytest.raises(ValueError):
        lsmc_fit(thetas, thetas[:, 0], order=1, ridge=-1.0)


def test_klsmc_matches_standardized_ridge_regression():
    rng = np.random.default_rng(5)
    thetas = rng.uniform(-2, 2, size=(12, 1))
    y = np.sin(thetas[:, 0]) + 0.1 * rng.standard_normal(12)
    kernel = Matern32(0.8, 1.5)
    star = np.array([[-1.0], [0.0], [1.3]])

    mean, std = y.mean(), y.std()
    coefficients = np.linalg.solve(kernel.matrix(thetas) + 0.1 * np.eye(12), (y - mean) / std)
    expected = mean + std * kernel.matrix(star, thetas) @ coefficients
    assert np.allclose(klsmc_predict(klsmc_fit(thetas, y, kernel, 0.1), star), expected, atol=1e-10)


def test_mobq_with_one_parameter_is_bayesian_quadrature():
    measure = Gaussian.standard(1)
    pair = EmbeddingPair(GaussianRbf(0.7, 2.0), measure)
    X = np.linspace(-2, 2, 7)[:, None]
    f = np.cos(X[:, 0])
    expected = bq_fit(pair.kernel, pair, X, f, reg=1e-6).mean
    assert mobq_estimate(X[None], f[None], pair.kernel, [pair], reg=1e-6)[0] == pytest.approx(expected, abs=1e-10)


def test_mobq_with_a_parameter_kernel():
    measure = Gaussian.standard(1)
    pair = EmbeddingPair(GaussianRbf(1.0), measure)
    rng = np.random.default_rng(6)
    samples = rng.standard_normal((3, 5, 1))
    thetas = np.array([[0.0], [1.0], [2.0]])
    f = samples[..., 0] + thetas
    model = mobq_fit(samples, f, pair.kernel, thetas=thetas, kernel_theta=GaussianRbf(1.0), reg=1e-6)
    assert np.isfinite(mobq_predict(model, pair, [1.0]))
    with pytest.raises(ValueError):
        mobq_predict(model, pair)


def test_mobq_estimate_predicts_every_test_parameter():
    rng = np.random.default_rng(6)
    samples = rng.standard_normal((3, 5, 1))
    thetas = np.array([[0.0], [1.0], [2.0]])
    f = samples[..., 0] + thetas
    pairs = [EmbeddingPair(GaussianRbf(1.0), Gaussian([m], [[1.0]])) for m in (0.5, 1.5)]
    stars = np.array([[0.5], [1.5]])
    model = mobq_fit(samples, f, GaussianRbf(1.0), thetas=thetas, kernel_theta=GaussianRbf(1.0), reg=1e-6)
    expected = [mobq_predict(model, pair, star) for pair, star in zip(pairs, stars)]
    estimates = mobq_estimate(samples, f, GaussianRbf(1.0), pairs, thetas=thetas, kernel_theta=GaussianRbf(1.0),
                              thetas_star=stars, reg=1e-6)
    assert np.allclose(estimates, expected, atol=1e-12)
    with pytest.raises(DimensionMismatch):
        mobq_estimate(samples, f, GaussianRbf(1.0), pairs, thetas=thetas, kernel_theta=GaussianRbf(1.0),
                      thetas_star=stars[:1], reg=1e-6)


def test_mobq_errors():
    pair = EmbeddingPair(GaussianRbf(1.0), Gaussian.standard(1))
    samples = np.zeros((2, 10, 1))
    with pytest.raises(CapExceeded):
        mobq_fit(samples, np.zeros((2, 10)), pair.kernel, cap=15)
    with pytest.raises(DimensionMismatch):
        mobq_fit(samples, np.zeros((2, 9)), pair.kernel)
    model = mobq_fit(np.linspace(-1, 1, 4)[None, :, None], np.ones((1, 4)), pair.kernel)
    with pytest.raises(EmbeddingMismatch):
        mobq_predict(model, EmbeddingPair(GaussianRbf(2.0), Gaussian.standard(1)))
