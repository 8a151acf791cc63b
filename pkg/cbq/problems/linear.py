"""Bayesian sensitivity analysis of a conjugate linear model to its prior covariance."""
from __future__ import annotations

__all__ = ['LinearProblem', 'LinearIntegrand', 'linear_bayes_problem', 'linear_posterior']

from enum import Enum
from typing import Tuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ..errors import DimensionMismatch, InvalidMeasure, OutOfDomain
from ..kernels import KernelFamily, KernelParams
from ..measures import Gaussian, Uniform
from .problem_abc import Problem, QuadratureSetup, gaussian_setup


class LinearIntegrand(Enum):
    second_moment = 'second_moment'
    predictive_mean = 'predictive_mean'


def linear_posterior(theta, design: np.ndarray, responses: np.ndarray, eta: float) -> Tuple[np.ndarray, np.ndarray]:
    """Posterior mean and covariance of the weights under the prior `N(0, diag(θ))`.

    ```
    Σ̃⁻¹ = diag(1/θ) + η·YᵀY
    m̃ = η·Σ̃·YᵀZ
    ```
    """
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != design.shape[1]:
        raise DimensionMismatch(design.shape[1], theta.size)
    if np.any(theta <= 0):
        raise OutOfDomain(f'Prior variances must be positive, got {theta.tolist()}.')
    precision = np.diag(1 / theta) + eta * design.T @ design
    factor = cho_factor(precision, lower=True)
    covariance = cho_solve(factor, np.eye(theta.size))
    covariance = (covariance + covariance.T) / 2
    mean = eta * covariance @ design.T @ responses
    return mean, covariance


class LinearProblem(Problem):
    """Weights `x ∈ ℝ^d` of a linear regression with prior `N(0, diag(θ))`, `θ ~ Unif(1, 3)^d`.

    `f(x) = xᵀx` has `I(θ) = tr(Σ̃) + m̃ᵀm̃`; `f(x) = xᵀy*` has `I(θ) = m̃ᵀy*`.
    """
    name = 'linear'
    families = (KernelFamily.rbf, KernelFamily.matern, KernelFamily.stein)
    default_family = KernelFamily.rbf

    def __init__(self, design, responses, *, eta: float = 1.0,
                 integrand: LinearIntegrand = LinearIntegrand.second_moment, target=None):
        self.design = np.atleast_2d(np.asarray(design, dtype=float))
        self.responses = np.asarray(responses, dtype=float).reshape(-1)
        if self.responses.size != self.design.shape[0]:
            raise DimensionMismatch(self.design.shape[0], self.responses.size)
        if not (np.all(np.isfinite(self.design)) and np.all(np.isfinite(self.responses))):
            raise InvalidMeasure('Linear model data must be finite.')
        self.eta = eta
        self.kind = integrand
        self.dim_x = self.dim_theta = self.design.shape[1]
        self.target = np.zeros(self.dim_x) if target is None else np.asarray(target, dtype=float).reshape(-1)
        if self.target.size != self.dim_x:
            raise DimensionMismatch(self.dim_x, self.target.size)
        self.prior = Uniform(np.ones(self.dim_theta), 3 * np.ones(self.dim_theta))

    def sample_theta(self, rng, count):
        return self.prior.sample(rng, count)

    def conditional_measure(self, theta) -> Gaussian:
        return Gaussian(*linear_posterior(theta, self.design, self.responses, self.eta))

    def integrand(self, X, theta, arm=0):
        X = np.asarray(X, dtype=float).reshape(-1, self.dim_x)
        if self.kind is LinearIntegrand.second_moment:
            return np.sum(X ** 2, axis=1)
        return X @ self.target

    def ground_truth(self, thetas, arm=0):
        truths = []
        for theta in np.asarray(thetas, dtype=float).reshape(-1, self.dim_theta):
            mean, covariance = linear_posterior(theta, self.design, self.responses, self.eta)
            if self.kind is LinearIntegrand.second_moment:
                truths.append(np.trace(covariance) + mean @ mean)
            else:
                truths.append(mean @ self.target)
        return np.array(truths)

    def quadrature_setup(self, theta, params: KernelParams) -> QuadratureSetup:
        return gaussian_setup(self.conditional_measure(theta), params)

    def describe(self) -> str:
        return f'{self.name}(d={self.dim_x},{self.kind.value})'


def linear_bayes_problem(d: int, eta: float = 1.0, design=None, responses=None,
                         integrand: LinearIntegrand = LinearIntegrand.second_moment,
                         target=None, seed: int = 0) -> LinearProblem:
    """A linear problem with `10·d` synthetic observations unless data is given.

    Design entries, true weights, observation noise and `y*` are standard normal draws
    from a generator seeded with `seed`.
    """
    rng = np.random.default_rng(seed)
    if design is None:
        design = rng.standard_normal((10 * d, d))
        weights = rng.standard_normal(d)
        responses = design @ weights + rng.standard_normal(10 * d)
    elif responses is None:
        raise DimensionMismatch(np.asarray(design).shape[0], 0)
    if target is None and integrand is LinearIntegrand.predictive_mean:
        target = rng.standard_normal(d)
    return LinearProblem(design, responses, eta=eta, integrand=integrand, target=target)
