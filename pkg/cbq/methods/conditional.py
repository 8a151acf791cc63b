"""Conditional Bayesian quadrature as a benchmark method."""
from __future__ import annotations

__all__ = ['ConditionalBq', 'stage2_params']

from dataclasses import replace
from logging import getLogger
from typing import List, Optional, Tuple

import numpy as np

from ..errors import DegenerateTargets, NonFiniteObjective
from ..hyperopt import grid_search_stage2, standardize
from ..kernels import KernelParams
from ..quadrature import BqPosterior, bq_fit, cbq_fit, cbq_predict_joint
from .method_abc import Estimates, Method, MethodSettings, ThetaScaler, pooled_standardize, select_stage1

logger = getLogger('cbq')

DEFAULT_LAMBDA_THETA = 0.1


def stage2_params(thetas: np.ndarray, means, variances,
                  settings: MethodSettings) -> Tuple[KernelParams, float]:
    """`k_Θ` and `λ_Θ` by empirical Bayes on standardized stage-one means."""
    template = KernelParams(settings.kernel_theta)
    lambdas = None if settings.lambda_theta is None else (settings.lambda_theta,)
    try:
        y, _, std = standardize(means)
        return grid_search_stage2(thetas, y, np.asarray(variances) / std ** 2, template, settings.grid, lambdas)
    except (DegenerateTargets, NonFiniteObjective) as e:
        logger.debug(f'Stage-two selection fell back to defaults ({type(e).__name__})')
        lam = DEFAULT_LAMBDA_THETA if settings.lambda_theta is None else settings.lambda_theta
        return template, lam


class ConditionalBq(Method):
    """Bayesian quadrature at each θ_t, then heteroscedastic GP regression over θ."""
    name = 'cbq'

    def stage1(self, problem, data, arm: int, params: Optional[KernelParams] = None
               ) -> Tuple[List[BqPosterior], KernelParams]:
        """Stage-one posteriors in the units of the integrand, and the hyperparameters used."""
        values, mean, std = pooled_standardize(data.values[arm])
        if params is None:
            params = select_stage1(problem, self.kernel_x(problem), data.thetas[0], data.samples[0],
                                   values[0], self.settings)
        posteriors = []
        for theta, samples, f in zip(data.thetas, data.samples, values):
            setup = problem.quadrature_setup(theta, params)
            fit = bq_fit(setup.pair.kernel, setup.pair, setup.to_space(samples),
                         setup.integrand_values(samples, f), self.settings.lambda_x)
            posteriors.append(replace(fit, mean=mean + std * fit.mean, variance=std ** 2 * fit.variance))
        return posteriors, params

    def estimate(self, problem, data, thetas_star, rng):
        scaler = ThetaScaler.fit(data.thetas)
        thetas, star = scaler(data.thetas), scaler(thetas_star)
        means, variances, hypers = [], [], []
        for arm in range(problem.arms):
            posteriors, params_x = self.stage1(problem, data, arm)
            stage1_means = np.array([p.mean for p in posteriors])
            stage1_variances = np.array([p.variance for p in posteriors])
            params_theta, lam = stage2_params(thetas, stage1_means, stage1_variances, self.settings)
            logger.debug(f'{problem.name} arm {arm}: k_X {params_x.describe()}, '
                         f'k_Θ {params_theta.describe()}, λ_Θ {lam:g}')
            model = cbq_fit(thetas, posteriors, params_theta.build(), lam)
            mean, covariance = cbq_predict_joint(model, star)
            means.append(mean)
            variances.append(np.diag(covariance).copy())
            hypers.append(f'x={params_x.describe()};theta={params_theta.describe()};lambda={lam:g}')
        return Estimates(np.stack(means), np.stack(variances), '|'.join(hypers))
