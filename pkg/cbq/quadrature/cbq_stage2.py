"""Stage two: heteroscedastic Gaussian-process regression of stage-one means over θ.

Each stage-one posterior contributes its variance as observation noise, so the Gram
matrix is regularized by the vector `λ_Θ + σ²_BQ(θ_t)` rather than by a scalar.
Targets are standardized before fitting and predictions mapped back, with predictive
variances scaled by `std²`.
"""
from __future__ import annotations

__all__ = ['CbqModel', 'cbq_fit', 'cbq_predict', 'cbq_predict_joint', 'fit_heteroscedastic']

from dataclasses import dataclass, field
from logging import getLogger
from typing import Sequence, Tuple

import numpy as np

from ..errors import DegenerateTargets, DimensionMismatch, EmptyInput, NegativeVariance
from ..hyperopt import standardize
from ..kernels import Kernel, as_points
from ..linalg import Factorization, clamp_variance, factorize
from .bq_stage1 import BqPosterior

logger = getLogger('cbq')


@dataclass(frozen=True)
class CbqModel:
    """A fitted stage-two posterior. Immutable, so predictions can run concurrently."""
    thetas: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    kernel: Kernel
    reg: float
    alpha: np.ndarray = field(repr=False)
    factorization: Factorization = field(repr=False)
    target_mean: float = 0.0
    target_std: float = 1.0
    prior_mean: float = 0.0

    @property
    def size(self) -> int:
        return self.thetas.shape[0]

    @property
    def standardized(self) -> bool:
        return self.target_mean != 0.0 or self.target_std != 1.0

    def weights(self, thetas_star) -> np.ndarray:
        """`(K_Θ + diag(λ_Θ + σ²))⁻¹k_Θ(θ_{1:T}, θ*)`, shape `(T, S)`.

        For an unstandardized fit with zero prior mean the prediction at θ* is
        `weights[:, s] · means`.
        """
        cross = self.kernel.matrix(self.thetas, as_points(thetas_star, self.thetas.shape[1]))
        return self.factorization.solve(cross)


def fit_heteroscedastic(thetas, targets, noise, kernel: Kernel, reg: float, *,
                        standardize_targets: bool = True, prior_mean: float = 0.0) -> CbqModel:
    """GP regression of `targets` over `thetas` with per-point noise variances `noise`.

    With `standardize_targets`, targets are standardized and noise divided by `std²`;
    a single target, or targets without spread, are fitted as given.
    """
    T = as_points(thetas)
    y = np.asarray(targets, dtype=float).reshape(-1)
    noise = np.asarray(noise, dtype=float).reshape(-1)
    if T.shape[0] == 0:
        raise EmptyInput('Stage-two regression')
    if y.size != T.shape[0] or noise.size != T.shape[0]:
        raise DimensionMismatch(T.shape[0], y.size if y.size != T.shape[0] else noise.size)
    if reg < 0:
        raise ValueError(f'Regularizer must be nonnegative, got {reg}.')
    if np.any(noise < 0):
        raise NegativeVariance(float(noise.min()), float(noise.max()))

    target_mean, target_std = 0.0, 1.0
    if standardize_targets and y.size > 1:
        try:
            y, target_mean, target_std = standardize(y)
            noise = noise / target_std ** 2
            prior_mean = 0.0
        except DegenerateTargets:
            logger.debug(f'Stage-two targets have no spread, fitting {y.size} values as given')
    elif standardize_targets:
        logger.debug('Single stage-two target, fitting without standardization')

    factorization = factorize(kernel.matrix(T), reg + noise)
    alpha = factorization.solve(y - prior_mean)
    return CbqModel(T, y, noise, kernel, reg, alpha, factorization, target_mean, target_std, prior_mean)


def cbq_fit(thetas, posteriors: Sequence[BqPosterior], kernel: Kernel, reg: float, *,
            standardize_targets: bool = True, prior_mean: float = 0.0) -> CbqModel:
    means = [p.mean for p in posteriors]
    variances = [p.variance for p in posteriors]
    return fit_heteroscedastic(thetas, means, variances, kernel, reg,
                               standardize_targets=standardize_targets, prior_mean=prior_mean)


def cbq_predict_joint(model: CbqModel, thetas_star) -> Tuple[np.ndarray, np.ndarray]:
    """Joint posterior mean and covariance of `I(θ*_1), ..., I(θ*_S)`."""
    S = as_points(thetas_star, model.thetas.shape[1])
    cross = model.kernel.matrix(model.thetas, S)
    prior = model.kernel.matrix(S)
    half = model.factorization.half_solve(cross)
    covariance = prior - half.T @ half
    covariance = (covariance + covariance.T) / 2
    for s in range(S.shape[0]):
        covariance[s, s] = clamp_variance(covariance[s, s], prior[s, s], model.factorization)
    mean = model.prior_mean + cross.T @ model.alpha
    return (model.target_mean + model.target_std * mean,
            model.target_std ** 2 * covariance)


def cbq_predict(model: CbqModel, theta_star) -> Tuple[float, float]:
    """Posterior mean and variance of `I(θ*)` at a single point."""
    mean, covariance = cbq_predict_joint(model, as_points(theta_star, model.thetas.shape[1])[:1])
    return float(mean[0]), float(covariance[0, 0])
