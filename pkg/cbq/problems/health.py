"""Expected value of partial perfect information for a two-treatment decision.

Seventeen uncertain inputs `x` and two measurable quantities `θ` are jointly Gaussian.
All are independent except `θ₁, θ₂, x₆, x₁₄`, which are pairwise correlated with
coefficient 0.6. Treatment outcomes are

```
f₁ = 10⁴(θ₁x₅x₆ + x₇x₈x₉) - (x₁ + x₂x₃x₄)
f₂ = 10⁴(θ₂x₁₃x₁₄ + x₁₅x₁₆x₁₇) - (x₁₀ + x₁₁x₁₂x₄)
```
and `EVPPI = E[max_c I_c(θ)] - max_c E[I_c(θ)]`.
"""
from __future__ import annotations

__all__ = ['HEALTH_MEANS', 'HEALTH_STDS', 'health_covariance', 'condition_gaussian', 'evppi',
           'evppi_estimate', 'HealthProblem', 'health_problem']

from logging import getLogger
from typing import TYPE_CHECKING, Callable, Optional, Tuple

import numpy as np

from ..errors import InvalidMeasure, NotApplicable
from ..kernels import KernelFamily, KernelParams
from ..measures import Gaussian
from .problem_abc import Problem, QuadratureSetup, gaussian_setup

if TYPE_CHECKING:
    from ..cache import TruthCache

logger = getLogger('cbq')

# x₁ … x₁₇, θ₁, θ₂
HEALTH_MEANS = np.array([1000, 0.1, 5.2, 400, 0.3, 3.0, 0.25, -0.1, 0.5,
                         1500, 0.08, 6.1, 0.3, 3.0, 0.2, -0.1, 0.5, 0.7, 0.8])
HEALTH_STDS = np.array([1.0, 0.02, 1.0, 200, 0.1, 0.5, 0.1, 0.02, 0.2,
                        1.0, 0.02, 1.0, 0.05, 1.0, 0.05, 0.02, 0.2, 0.1, 0.1])
CORRELATED = (5, 13, 17, 18)
THETA_INDEX = (17, 18)
X_INDEX = tuple(range(17))


def health_covariance(correlation: float = 0.6) -> np.ndarray:
    corr = np.eye(HEALTH_MEANS.size)
    for i in CORRELATED:
        for j in CORRELATED:
            if i != j:
                corr[i, j] = correlation
    return corr * np.outer(HEALTH_STDS, HEALTH_STDS)


def condition_gaussian(mean, covariance, observed: Tuple[int, ...], values) -> Tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of the remaining coordinates given the observed ones.

    ```
    m = m_u + Σ_uo Σ_oo⁻¹ (v - m_o)
    Σ = Σ_uu - Σ_uo Σ_oo⁻¹ Σ_ou
    ```
    """
    mean = np.asarray(mean, dtype=float)
    covariance = np.asarray(covariance, dtype=float)
    observed = tuple(observed)
    rest = [i for i in range(mean.size) if i not in observed]
    values = np.asarray(values, dtype=float).reshape(-1)
    cross = covariance[np.ix_(rest, observed)]
    gain = np.linalg.solve(covariance[np.ix_(observed, observed)], cross.T).T
    conditional_mean = mean[rest] + gain @ (values - mean[list(observed)])
    conditional_cov = covariance[np.ix_(rest, rest)] - gain @ cross.T
    return conditional_mean, (conditional_cov + conditional_cov.T) / 2


def evppi(values) -> float:
    """EVPPI from per-arm conditional expectations of shape `(arms, S)`."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[0] < 2:
        raise NotApplicable('EVPPI needs at least two treatment arms.')
    return float(np.mean(values.max(axis=0)) - values.mean(axis=1).max())


def evppi_estimate(problem: Problem, estimator: Callable[[np.ndarray], np.ndarray], thetas) -> float:
    """Plug estimates `I_c(θ)` from `estimator` into the outer Monte Carlo averages."""
    if problem.arms < 2:
        raise NotApplicable(f'{problem.name} has a single arm, EVPPI needs at least two.')
    return evppi(estimator(np.asarray(thetas, dtype=float)))


def _outcome_1(X, theta):
    x = X.T
    return 1e4 * (theta[0] * x[4] * x[5] + x[6] * x[7] * x[8]) - (x[0] + x[1] * x[2] * x[3])


def _outcome_2(X, theta):
    x = X.T
    return 1e4 * (theta[1] * x[12] * x[13] + x[14] * x[15] * x[16]) - (x[9] + x[10] * x[11] * x[3])


class HealthProblem(Problem):
    """Two arms over a 17-dimensional Gaussian conditional on two measured probabilities.

    The conditional covariance does not depend on θ; only the conditional mean does.
    `identical_arms` replaces the second treatment with the first.
    """
    name = 'health'
    dim_x = 17
    dim_theta = 2
    arms = 2
    theta_dependent = True
    families = (KernelFamily.matern, KernelFamily.rbf)
    default_family = KernelFamily.matern

    def __init__(self, *, correlation: float = 0.6, identical_arms: bool = False,
                 reference_draws: int = 10 ** 6, ground_truth_seed: int = 0,
                 cache: Optional[TruthCache] = None):
        self.correlation = correlation
        self.identical_arms = identical_arms
        self.reference_draws = reference_draws
        self.ground_truth_seed = ground_truth_seed
        self.cache = cache
        self.joint = Gaussian(HEALTH_MEANS, health_covariance(correlation))
        self.prior = Gaussian(HEALTH_MEANS[list(THETA_INDEX)],
                              self.joint.covariance[np.ix_(THETA_INDEX, THETA_INDEX)])
        _, covariance = condition_gaussian(HEALTH_MEANS, self.joint.covariance, THETA_INDEX, self.prior.location)
        if np.min(np.linalg.eigvalsh(covariance)) <= 0:
            raise InvalidMeasure('Conditional covariance is not positive definite.')
        self._covariance = covariance
        self._reference: Optional[float] = None

    def _theta(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.size != self.dim_theta:
            raise InvalidMeasure(f'Health parameters have dimension 2, got {theta.size}.')
        return theta

    def conditional_mean(self, theta) -> np.ndarray:
        mean, _ = condition_gaussian(HEALTH_MEANS, self.joint.covariance, THETA_INDEX, self._theta(theta))
        return mean

    def sample_theta(self, rng, count):
        return self.prior.sample(rng, count)

    def conditional_measure(self, theta) -> Gaussian:
        return Gaussian(self.conditional_mean(theta), self._covariance)

    def integrand(self, X, theta, arm=0):
        X = np.asarray(X, dtype=float).reshape(-1, self.dim_x)
        theta = self._theta(theta)
        if arm == 0 or self.identical_arms:
            return _outcome_1(X, theta)
        return _outcome_2(X, theta)

    def ground_truth(self, thetas, arm=0):
        """Exact `I_c(θ)`: every product in `f_c` has conditionally independent factors."""
        truths = []
        for theta in np.asarray(thetas, dtype=float).reshape(-1, self.dim_theta):
            m = self.conditional_mean(theta)
            truths.append(_outcome_1(m[None, :], theta)[0] if arm == 0 or self.identical_arms
                          else _outcome_2(m[None, :], theta)[0])
        return np.array(truths)

    def prepare(self):
        self.evppi_reference()

    def error(self, thetas, estimates):
        """Absolute error of the plug-in EVPPI against the `reference_draws` reference."""
        estimated = evppi_estimate(self, lambda _: np.asarray(estimates, dtype=float), thetas)
        return abs(estimated - self.evppi_reference())

    def evppi_reference(self) -> float:
        """EVPPI over `reference_draws` draws of θ from the joint, cached by configuration."""
        if self._reference is not None:
            return self._reference
        key = dict(problem=self.name, correlation=self.correlation, identical_arms=self.identical_arms,
                   draws=self.reference_draws, seed=self.ground_truth_seed)
        if self.cache is not None:
            table = self.cache.load(self.name, key)
            if table is not None:
                self._reference = float(table[0, 0])
                return self._reference
        logger.info(f'{self.name}: computing EVPPI reference from {self.reference_draws} draws')
        rng = np.random.default_rng([self.ground_truth_seed, self.reference_draws])
        thetas = self.sample_theta(rng, self.reference_draws)
        center, _ = condition_gaussian(HEALTH_MEANS, self.joint.covariance, THETA_INDEX, self.prior.location)
        coefficients = np.linalg.solve(self.prior.covariance,
                                       self.joint.covariance[np.ix_(THETA_INDEX, X_INDEX)]).T
        means = center[None, :] + (thetas - self.prior.location) @ coefficients.T
        values = np.stack([_outcome_1(means, thetas.T),
                           _outcome_1(means, thetas.T) if self.identical_arms else _outcome_2(means, thetas.T)])
        self._reference = evppi(values)
        if self.cache is not None:
            self.cache.store(self.name, key, np.array([[self._reference]]), header=('evppi',))
        return self._reference

    def quadrature_setup(self, theta, params: KernelParams) -> QuadratureSetup:
        location = HEALTH_MEANS[:self.dim_x]
        scale = HEALTH_STDS[:self.dim_x]
        conditional = self.conditional_measure(theta)
        standardized = Gaussian((conditional.location - location) / scale,
                                conditional.covariance / np.outer(scale, scale))
        return gaussian_setup(standardized, params, lambda X: (X - location) / scale, shared=True)

    def describe(self) -> str:
        return f'{self.name}(ρ={self.correlation:g}{",identical" if self.identical_arms else ""})'


def health_problem(**options) -> HealthProblem:
    return HealthProblem(**options)
