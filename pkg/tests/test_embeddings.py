import numpy as np
import pytest

from cbq.embeddings import (EmbeddingPair, initial_error, inverse_transform, kme, matern_normal_embedding,
                            numeric_expectation, numeric_kme_oracle, reweight_integrand)
from cbq.errors import OutOfDomain, UnsupportedPair
from cbq.kernels import GaussianRbf, LogGaussian, Matern32, Metric, Stein, score_of
from cbq.measures import Gamma, Gaussian, Lognormal


def random_configs(count=5, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield rng.uniform(0.3, 2.0), rng.uniform(0.5, 3.0), rng.uniform(-1.0, 1.0), rng.uniform(0.3, 2.0)


def test_rbf_gaussian_embedding_matches_quadrature():
    for lengthscale, amplitude, location, std in random_configs():
        measure = Gaussian(np.array([location]), np.array([[std ** 2]]))
        pair = EmbeddingPair(GaussianRbf(lengthscale, amplitude), measure)
        for x in (-1.5, 0.2, 2.0):
            assert kme(pair, [x]) == pytest.approx(numeric_kme_oracle(pair.kernel, measure, [x]).value, abs=1e-6)


def test_rbf_gaussian_initial_error_matches_quadrature():
    for lengthscale, amplitude, location, std in random_configs(seed=1):
        measure = Gaussian(np.array([location]), np.array([[std ** 2]]))
        pair = EmbeddingPair(GaussianRbf(lengthscale, amplitude), measure)
        assert initial_error(pair) == pytest.approx(numeric_expectation(pair.embedding, measure).value, abs=1e-6)


def test_rbf_gaussian_two_dimensions_match_monte_carlo():
    covariance = np.array([[1.0, 0.4], [0.4, 0.5]])
    measure = Gaussian(np.array([0.2, -0.3]), covariance)
    pair = EmbeddingPair(GaussianRbf(0.8, 2.0), measure)
    rng = np.random.default_rng(3)
    point = np.array([0.5, 0.1])
    oracle = numeric_kme_oracle(pair.kernel, measure, point, monte_carlo=True, draws=200_000, rng=rng)
    assert abs(kme(pair, point) - oracle.value) <= 4 * oracle.error
    average = numeric_expectation(pair.embedding, measure, monte_carlo=True, draws=200_000, rng=rng)
    assert abs(pair.initial_error() - average.value) <= 4 * average.error


def test_matern_standard_normal_embedding_matches_quadrature():
    measure = Gaussian.standard(1)
    for lengthscale, amplitude, _, _ in random_configs(seed=2):
        pair = EmbeddingPair(Matern32(lengthscale, amplitude, Metric.tensor), measure)
        for x in (-2.0, 0.0, 0.7):
            assert kme(pair, [x]) == pytest.approx(numeric_kme_oracle(pair.kernel, measure, [x]).value, abs=1e-6)
        assert pair.initial_error() == pytest.approx(numeric_expectation(pair.embedding, measure).value, abs=1e-6)


def test_matern_tensor_embedding_is_a_product():
    kernel = Matern32(0.9, 1.5, Metric.tensor)
    pair = EmbeddingPair(kernel, Gaussian.standard(2))
    x = np.array([[0.3, -1.2]])
    factors = matern_normal_embedding(x, kernel.rate)
    assert pair.embedding(x)[0] == pytest.approx(1.5 * factors[0, 0] * factors[0, 1])
    one = EmbeddingPair(Matern32(0.9, 1.0, Metric.tensor), Gaussian.standard(1)).initial_error()
    assert pair.initial_error() == pytest.approx(1.5 * one ** 2)


def test_matern_hermite_nodes_close_to_closed_form():
    x = np.linspace(-2, 2, 9)
    closed = matern_normal_embedding(x, 1.3)
    hermite = matern_normal_embedding(x, 1.3, hermite_nodes=64)
    assert np.allclose(closed, hermite, atol=1e-3)
    with pytest.raises(ValueError):
        matern_normal_embedding(x, 1.3, hermite_nodes=32)


def test_log_gaussian_embedding_matches_quadrature():
    for lengthscale, amplitude, log_mean, log_std in random_configs(seed=4):
        measure = Lognormal(log_mean, log_std ** 2)
        pair = EmbeddingPair(LogGaussian(lengthscale, amplitude), measure)
        for x in (0.3, 1.0, 4.0):
            assert kme(pair, [x]) == pytest.approx(numeric_kme_oracle(pair.kernel, measure, [x]).value, abs=1e-6)
        assert pair.initial_error() == pytest.approx(numeric_expectation(pair.embedding, measure).value, abs=1e-6)


def test_log_gaussian_empirical_initial_error():
    measure = Lognormal(0.0, 0.5)
    pair = EmbeddingPair(LogGaussian(1.0), measure, empirical_initial_error=True)
    samples = measure.sample(np.random.default_rng(0), 50)
    assert pair.initial_error(samples) == pytest.approx(np.mean(pair.embedding(samples)))
    with pytest.raises(UnsupportedPair):
        pair.initial_error()


def test_log_gaussian_embedding_needs_positive_points():
    pair = EmbeddingPair(LogGaussian(1.0), Lognormal(0.0, 1.0))
    with pytest.raises(OutOfDomain):
        pair.embedding([[-1.0]])


def test_stein_embedding_is_constant():
    measure = Gamma(3.0, 10.0)
    pair = EmbeddingPair(Stein(Matern32(0.2), score_of(measure), 0.7), measure)
    assert np.all(pair.embedding([[0.1], [0.3], [1.0]]) == 0.7)
    assert pair.initial_error() == 0.7


def test_unsupported_pairs():
    with pytest.raises(UnsupportedPair):
        EmbeddingPair(GaussianRbf(1.0), Lognormal(0.0, 1.0))
    with pytest.raises(UnsupportedPair):
        EmbeddingPair(Matern32(1.0), Gaussian(np.array([1.0]), np.array([[1.0]])))
    with pytest.raises(UnsupportedPair):
        EmbeddingPair(Matern32(1.0, metric=Metric.isotropic), Gaussian.standard(2))
    with pytest.raises(UnsupportedPair):
        EmbeddingPair(Stein(GaussianRbf(1.0), score_of(Gaussian.standard(1))), Gaussian.standard(1))


def test_inverse_transform_moments():
    mean = np.array([1.0, -2.0])
    covariance = np.array([[2.0, 0.6], [0.6, 1.0]])
    measure = Gaussian(mean, covariance)
    U = np.random.default_rng(5).standard_normal((200_000, 2))
    X = inverse_transform(measure, U)
    assert np.allclose(X.mean(axis=0), mean, atol=0.02)
    assert np.allclose(np.cov(X.T), covariance, atol=0.03)
    assert np.allclose(measure.whiten(X), U)


def test_reweight_integrand():
    p = Gaussian(np.array([0.5]), np.array([[1.0]]))
    q = Gaussian.standard(1)
    g = reweight_integrand(lambda X: X[:, 0], p.density, q.density)
    X = np.array([[0.0], [1.0]])
    assert np.allclose(g(X), X[:, 0] * p.density(X) / q.density(X))
    assert numeric_expectation(g, q).value == pytest.approx(0.5, abs=1e-7)
    vanishing = reweight_integrand(lambda X: X[:, 0], p.density, lambda X: np.zeros(len(X)))
    with pytest.raises(OutOfDomain):
        vanishing(X)
