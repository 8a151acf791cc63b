"""Two-stage baselines: Monte Carlo means at each θ_t regressed over θ.

Regression hyperparameters are chosen by RMSE on a held-out fifth of the θ_t, then the
model is refit on all of them.
"""
from __future__ import annotations

__all__ = ['LeastSquaresMc', 'KernelLsmc', 'monte_carlo_means']

from dataclasses import replace
from logging import getLogger
from typing import Callable, Iterable, Optional, Tuple, TypeVar

import numpy as np

from ..errors import CbqError
from ..kernels import KernelParams
from ..metrics import rmse
from ..quadrature import klsmc_fit, klsmc_predict, lsmc_fit, lsmc_predict, monomial_powers
from .method_abc import Estimates, Method, ThetaScaler, validation_split

logger = getLogger('cbq')

Choice = TypeVar('Choice')


def monte_carlo_means(values: np.ndarray) -> np.ndarray:
    """`(arms, T, N)` integrand values to `(arms, T)` Monte Carlo means."""
    return np.asarray(values, dtype=float).mean(axis=2)


def select_by_validation(choices: Iterable[Choice],
                         fit_predict: Callable[[Choice, np.ndarray, np.ndarray], np.ndarray],
                         targets: np.ndarray, split: Tuple[np.ndarray, np.ndarray]) -> Optional[Choice]:
    """The first choice with the lowest held-out RMSE; choices that fail to fit are skipped."""
    train, valid = split
    best, best_error = None, np.inf
    for choice in choices:
        try:
            error = rmse(fit_predict(choice, train, valid), targets[valid])
        except (CbqError, ValueError, np.linalg.LinAlgError) as e:
            logger.debug(f'Validation choice {choice} failed: {e}')
            continue
        if error < best_error:
            best, best_error = choice, error
    return best


class LeastSquaresMc(Method):
    name = 'lsmc'

    def _default(self, T: int, dim: int) -> Tuple[int, float]:
        if T >= len(monomial_powers(dim, 1)):
            return 1, 0.0
        return 1, self.settings.grid.lambdas_theta[0]

    def estimate(self, problem, data, thetas_star, rng):
        scaler = ThetaScaler.fit(data.thetas)
        thetas, star = scaler(data.thetas), scaler(thetas_star)
        targets = monte_carlo_means(data.values)
        split = validation_split(rng, thetas.shape[0], self.settings.validation_fraction)
        ridges = (0.0, *self.settings.grid.lambdas_theta)
        choices = [(order, ridge) for order in self.settings.lsmc_orders for ridge in ridges]
        means, hypers = [], []
        for y in targets:
            def fit_predict(choice, train, valid):
                return lsmc_predict(lsmc_fit(thetas[train], y[train], *choice), thetas[valid])

            chosen = select_by_validation(choices, fit_predict, y, split) if split else None
            order, ridge = chosen or self._default(*thetas.shape)
            means.append(lsmc_predict(lsmc_fit(thetas, y, order, ridge), star))
            hypers.append(f'order={order};ridge={ridge:g}')
        return Estimates(np.stack(means), None, '|'.join(hypers))


class KernelLsmc(Method):
    name = 'klsmc'

    def estimate(self, problem, data, thetas_star, rng):
        scaler = ThetaScaler.fit(data.thetas)
        thetas, star = scaler(data.thetas), scaler(thetas_star)
        targets = monte_carlo_means(data.values)
        split = validation_split(rng, thetas.shape[0], self.settings.validation_fraction)
        grid = self.settings.grid
        template = KernelParams(self.settings.kernel_theta)
        lambdas = grid.lambdas_theta if self.settings.lambda_theta is None else (self.settings.lambda_theta,)
        choices = [(l, a, lam) for l in grid.lengthscales for a in grid.amplitudes for lam in lambdas]
        means, hypers = [], []
        for y in targets:
            def fit_predict(choice, train, valid):
                l, a, lam = choice
                kernel = replace(template, lengthscale=l, amplitude=a).build()
                return klsmc_predict(klsmc_fit(thetas[train], y[train], kernel, lam), thetas[valid])

            chosen = select_by_validation(choices, fit_predict, y, split) if split else None
            l, a, lam = chosen or (template.lengthscale, template.amplitude, lambdas[0])
            params = replace(template, lengthscale=l, amplitude=a)
            means.append(klsmc_predict(klsmc_fit(thetas, y, params.build(), lam), star))
            hypers.append(f'theta={params.describe()};lambda={lam:g}')
        return Estimates(np.stack(means), None, '|'.join(hypers))
