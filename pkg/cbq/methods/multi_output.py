from __future__ import annotations

__all__ = ['MultiOutputBq']

import numpy as np

from ..errors import NotApplicable
from ..hyperopt import median_heuristic
from ..kernels import KernelParams
from ..quadrature import mobq_estimate
from .method_abc import Estimates, Method, ThetaScaler, pooled_standardize, select_stage1


class MultiOutputBq(Method):
    """One Gaussian process over all `N·T` samples.

    Problems whose integrand depends on θ use the product kernel `k_X·k_Θ`, with the
    `k_Θ` lengthscale set by the median heuristic on standardized θ.
    """
    name = 'mobq'

    def check(self, problem):
        theta = problem.sample_theta(np.random.default_rng(0), 1)[0]
        if not problem.quadrature_setup(theta, self.kernel_x(problem)).shared:
            raise NotApplicable(f'MOBQ needs a kernel space shared by every θ, which {problem.name} '
                                f'with kernel_x={self.kernel_x(problem).family.value} does not have.')

    def estimate(self, problem, data, thetas_star, rng):
        self.check(problem)
        scaler = ThetaScaler.fit(data.thetas)
        thetas, star = scaler(data.thetas), scaler(thetas_star)
        kernel_theta = None
        hypers_theta = ''
        if problem.theta_dependent:
            params_theta = KernelParams(self.settings.kernel_theta, lengthscale=median_heuristic(thetas))
            kernel_theta = params_theta.build()
            hypers_theta = f';theta={params_theta.describe()}'

        means, hypers = [], []
        for arm in range(problem.arms):
            values, mean, std = pooled_standardize(data.values[arm])
            params = select_stage1(problem, self.kernel_x(problem), data.thetas[0], data.samples[0],
                                   values[0], self.settings)
            setup = problem.quadrature_setup(data.thetas[0], params)
            samples = np.stack([setup.to_space(X) for X in data.samples])
            pairs = [problem.quadrature_setup(theta, params).pair for theta in thetas_star]
            predictions = mobq_estimate(samples, values, setup.pair.kernel, pairs, thetas=thetas,
                                        kernel_theta=kernel_theta, thetas_star=star,
                                        reg=self.settings.lambda_x, cap=self.settings.mobq_cap)
            means.append(mean + std * np.array(predictions))
            hypers.append(f'x={params.describe()}{hypers_theta}')
        return Estimates(np.stack(means), None, '|'.join(hypers))
