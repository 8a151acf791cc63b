from __future__ import annotations

__all__ = ['MonteCarlo', 'ImportanceSampling']

import numpy as np

from ..errors import NotApplicable
from ..quadrature import is_estimate, mc_estimate
from .method_abc import Estimates, Method


class MonteCarlo(Method):
    """A fresh Monte Carlo average of `N` draws at every test parameter."""
    name = 'mc'

    def estimate(self, problem, data, thetas_star, rng):
        N, _ = data.size
        means = np.empty((problem.arms, len(thetas_star)))
        for s, theta in enumerate(thetas_star):
            X = problem.conditional_measure(theta).sample(rng, N)
            for arm in range(problem.arms):
                means[arm, s] = mc_estimate(problem.integrand(X, theta, arm))
        return Estimates(means, None, f'N={N}')


class ImportanceSampling(Method):
    """Reweights every stage-one sample towards `P_θ*`, using `P_θ1, ..., P_θT` as proposals."""
    name = 'is'

    def check(self, problem):
        if problem.theta_dependent:
            raise NotApplicable(f'Importance sampling needs an integrand that does not depend on θ, '
                                f'but the {problem.name} integrand does.')

    def estimate(self, problem, data, thetas_star, rng):
        self.check(problem)
        proposal = np.stack([problem.log_density(X, theta) for X, theta in zip(data.samples, data.thetas)])
        means = np.empty((problem.arms, len(thetas_star)))
        for s, theta in enumerate(thetas_star):
            target = np.stack([problem.log_density(X, theta) for X in data.samples])
            for arm in range(problem.arms):
                means[arm, s] = is_estimate(data.values[arm], target, proposal,
                                            normalized=self.settings.normalized_is)
        form = '1/(NT)' if self.settings.normalized_is else '1/T'
        return Estimates(means, None, f'normalization={form}')
