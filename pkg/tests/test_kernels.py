from math import exp, sqrt

import numpy as np
import pytest

from cbq.embeddings import numeric_kme_oracle
from cbq.errors import DimensionMismatch, InvalidKernel, OutOfDomain
from cbq.kernels import (GaussianRbf, KernelFamily, KernelParams, LogGaussian, Matern32, Metric, Stein, as_points,
                         eval_kernel, gram, score_of, stein_eval)
from cbq.measures import Gaussian


def test_matern_value():
    k = Matern32(lengthscale=1.0, amplitude=1.0)
    assert k([0.0], [1.0]) == pytest.approx((1 + sqrt(3)) * exp(-sqrt(3)))
    assert eval_kernel(Matern32(2.0, 3.0), [0.5], [0.5]) == pytest.approx(3.0)


def test_rbf_value():
    k = GaussianRbf(lengthscale=2.0, amplitude=5.0)
    assert k([0.0, 0.0], [1.0, 1.0]) == pytest.approx(5.0 * exp(-2.0 / 8.0))


def test_tensor_matern_is_a_product():
    k = Matern32(1.0, 2.0, Metric.tensor)
    one = Matern32(1.0, 1.0)
    assert k([0.0, 0.0], [0.5, -1.0]) == pytest.approx(2.0 * one([0.0], [0.5]) * one([0.0], [-1.0]))


@pytest.mark.parametrize('kernel', [GaussianRbf(0.7, 2.0), Matern32(0.7, 2.0), Matern32(0.7, 2.0, Metric.tensor),
                                    LogGaussian(0.7, 2.0)])
def test_gram_symmetric_positive_semidefinite(kernel):
    X = np.random.default_rng(1).uniform(0.5, 3.0, size=(25, 2))
    K = gram(kernel, X, X)
    assert np.allclose(K, K.T)
    assert np.linalg.eigvalsh(K).min() > -1e-10


@pytest.mark.parametrize('kernel', [GaussianRbf(0.8, 1.5), Matern32(0.8, 1.5), Matern32(0.8, 1.5, Metric.tensor)])
def test_derivatives_match_finite_differences(kernel):
    x = np.array([[0.3, -0.2]])
    y = np.array([[1.0, 0.5]])
    K, grad_x, grad_y, cross = kernel.derivatives(x, y)
    h = 1e-5
    expected_cross = 0.0
    for i in range(2):
        e = np.zeros((1, 2))
        e[0, i] = h
        numeric = (kernel.matrix(x + e, y) - kernel.matrix(x - e, y))[0, 0] / (2 * h)
        assert grad_x[0, 0, i] == pytest.approx(numeric, rel=1e-5, abs=1e-8)
        numeric_y = (kernel.matrix(x, y + e) - kernel.matrix(x, y - e))[0, 0] / (2 * h)
        assert grad_y[0, 0, i] == pytest.approx(numeric_y, rel=1e-5, abs=1e-8)
        g = 1e-4
        e = e / h * g
        expected_cross += (kernel.matrix(x + e, y + e) - kernel.matrix(x + e, y - e)
                           - kernel.matrix(x - e, y + e) + kernel.matrix(x - e, y - e))[0, 0] / (4 * g ** 2)
    assert K[0, 0] == pytest.approx(kernel(x, y))
    assert cross[0, 0] == pytest.approx(expected_cross, rel=1e-4)


def test_matern_cross_term_at_zero_distance():
    k = Matern32(2.0, 1.5)
    _, _, _, cross = k.derivatives(np.zeros((1, 3)), np.zeros((1, 3)))
    assert cross[0, 0] == pytest.approx(1.5 * 3 * 3 / 4.0)


@pytest.mark.parametrize('base', [GaussianRbf(1.0, 1.0), Matern32(1.0, 1.0)])
def test_stein_mean_is_its_constant(base):
    measure = Gaussian(np.array([0.5]), np.array([[2.0]]))
    stein = Stein(base, score_of(measure), constant=0.3)
    for x in (-1.0, 0.5, 2.0):
        assert numeric_kme_oracle(stein, measure, [x], tol=1e-7).value == pytest.approx(0.3, abs=1e-6)


def test_stein_matches_scalar_eval():
    score = score_of(Gaussian.standard(1))
    k = Stein(GaussianRbf(1.0), score, 0.2)
    assert stein_eval(GaussianRbf(1.0), score, 0.2, [0.1], [0.4]) == pytest.approx(k([0.1], [0.4]))


def test_stein_rejects_bad_bases():
    score = score_of(Gaussian.standard(1))
    with pytest.raises(InvalidKernel):
        Stein(LogGaussian(1.0), score)
    with pytest.raises(InvalidKernel):
        Stein(Stein(GaussianRbf(1.0), score), score)
    with pytest.raises(InvalidKernel):
        Stein(GaussianRbf(1.0), score, constant=float('inf'))


def test_stein_checks_dimension():
    k = Stein(GaussianRbf(1.0), score_of(Gaussian.standard(2)))
    with pytest.raises(DimensionMismatch):
        k.matrix(np.zeros((3, 1)))


@pytest.mark.parametrize('value', [0.0, -1.0, float('nan'), float('inf')])
def test_invalid_hyperparameters(value):
    with pytest.raises(InvalidKernel):
        GaussianRbf(value)
    with pytest.raises(InvalidKernel):
        Matern32(1.0, value)


def test_log_gaussian_needs_positive_inputs():
    with pytest.raises(OutOfDomain):
        LogGaussian(1.0)([0.0], [1.0])


def test_as_points():
    assert as_points([1.0, 2.0, 3.0]).shape == (3, 1)
    assert as_points([1.0, 2.0, 3.0], dim=3).shape == (1, 3)
    assert as_points(2.0).shape == (1, 1)
    with pytest.raises(DimensionMismatch):
        as_points(np.zeros((2, 2)), dim=3)


def test_params_build():
    assert KernelParams(KernelFamily.rbf, 2.0, 3.0).build() == GaussianRbf(2.0, 3.0)
    assert KernelParams(KernelFamily.matern, metric=Metric.tensor).build() == Matern32(1.0, 1.0, Metric.tensor)
    assert KernelParams(KernelFamily.log_gaussian).build() == LogGaussian(1.0, 1.0)
    score = score_of(Gaussian.standard(1))
    stein = KernelParams(KernelFamily.stein, constant=0.5).build(score)
    assert isinstance(stein, Stein)
    assert stein.base == Matern32(1.0, 1.0)
    assert stein.constant == 0.5
    with pytest.raises(InvalidKernel):
        KernelParams(KernelFamily.stein).build()


def test_params_describe():
    assert KernelParams(KernelFamily.rbf, 1.0, 2.0).describe() == 'rbf(l=1,A=2)'
    assert KernelParams(KernelFamily.stein, 0.5, 1.0, 0.25).describe() == 'stein(l=0.5,A=1,c=0.25)'
