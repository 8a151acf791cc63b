"""Empirical Bayes hyperparameter selection.

Both stages maximize a Gaussian log-marginal likelihood over a fixed grid; Stein kernels
instead climb the stage-one likelihood in `(c, log l, log A)` by deterministic
finite-difference gradient ascent.
"""
from __future__ import annotations

__all__ = ['HyperGrid', 'standardize', 'destandardize', 'log_marginal', 'stage1_log_marginal',
           'stage2_log_marginal', 'grid_search_stage1', 'grid_search_stage2', 'stein_c_descent',
           'median_heuristic', 'finite_gradient']

from dataclasses import dataclass, replace
from logging import getLogger
from math import log, pi
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import pdist

from .errors import CbqError, DegenerateTargets, DimensionMismatch, InvalidKernel, NonFiniteObjective
from .kernels import Kernel, KernelFamily, KernelParams, ScoreFn, as_points
from .linalg import Regularizer, factorize

logger = getLogger('cbq')


def _increasing(name: str, values: Sequence[float]):
    if not values or any(v <= 0 for v in values) or any(a >= b for a, b in zip(values, values[1:])):
        raise ValueError(f'HyperGrid {name} must be positive and strictly increasing, got {values}.')


@dataclass(frozen=True)
class HyperGrid:
    amplitudes: Tuple[float, ...] = (1.0, 10.0, 100.0, 1000.0)
    lengthscales: Tuple[float, ...] = (0.1, 0.3, 1.0, 3.0, 10.0)
    lambdas_theta: Tuple[float, ...] = (0.01, 0.1, 1.0)

    def __post_init__(self):
        _increasing('amplitudes', self.amplitudes)
        _increasing('lengthscales', self.lengthscales)
        _increasing('lambdas_theta', self.lambdas_theta)


def _check_spread(values: np.ndarray) -> Tuple[float, float]:
    mean = float(np.mean(values))
    std = float(np.std(values))
    if values.size < 2 or std <= 1e-12 * (1 + abs(mean)):
        raise DegenerateTargets()
    return mean, std


def standardize(values) -> Tuple[np.ndarray, float, float]:
    """Subtract the empirical mean and divide by the population standard deviation.

    >>> standardize([0.0, 2.0])
    (array([-1.,  1.]), 1.0, 1.0)
    """
    v = np.asarray(values, dtype=float).reshape(-1)
    mean, std = _check_spread(v)
    return (v - mean) / std, mean, std


def destandardize(values, mean: float, std: float) -> np.ndarray:
    return np.asarray(values, dtype=float) * std + mean


def log_marginal(K, targets, reg: Regularizer = 0.0, prior_mean: float = 0.0) -> float:
    """`-½log|K + reg| - (n/2)log 2π - ½(y - m)ᵀ(K + reg)⁻¹(y - m)`."""
    y = np.asarray(targets, dtype=float).reshape(-1) - prior_mean
    factorization = factorize(K, reg)
    half = factorization.half_solve(y)
    return -0.5 * factorization.log_det - 0.5 * y.size * log(2 * pi) - 0.5 * float(half @ half)


def stage1_log_marginal(kernel: Kernel, samples, f_vals, reg: float = 0.0, prior_mean: float = 0.0) -> float:
    X = as_points(samples)
    return log_marginal(kernel.matrix(X), f_vals, reg, prior_mean)


def stage2_log_marginal(kernel: Kernel, thetas, means, variances, reg: float) -> float:
    T = as_points(thetas)
    variances = np.asarray(variances, dtype=float).reshape(-1)
    if variances.size != T.shape[0]:
        raise DimensionMismatch(T.shape[0], variances.size)
    return log_marginal(kernel.matrix(T), means, reg + variances)


def _argmax(cells, objective: Callable) -> tuple:
    """First cell with the strictly largest finite objective; failed cells are skipped."""
    best, best_value = None, -np.inf
    for cell in cells:
        try:
            value = objective(*cell)
        except CbqError as e:
            logger.debug(f'Grid cell {cell} failed: {e}')
            continue
        if np.isfinite(value) and value > best_value:
            best, best_value = cell, value
    if best is None:
        raise NonFiniteObjective('Every grid cell failed numerically.')
    return best


def grid_search_stage1(samples, f_vals, template: KernelParams, score: Optional[ScoreFn] = None,
                       grid: HyperGrid = HyperGrid(), reg: float = 0.0) -> KernelParams:
    """Amplitude and lengthscale of `template` maximizing the stage-one log-marginal.

    Ties go to the smallest lengthscale, then the smallest amplitude.
    """
    X = as_points(samples)
    f = np.asarray(f_vals, dtype=float).reshape(-1)
    _check_spread(f)
    cells = [(l, a) for l in grid.lengthscales for a in grid.amplitudes]

    def objective(l, a):
        return stage1_log_marginal(replace(template, lengthscale=l, amplitude=a).build(score), X, f, reg)

    l, a = _argmax(cells, objective)
    return replace(template, lengthscale=l, amplitude=a)


def grid_search_stage2(thetas, means, variances, template: KernelParams,
                       grid: HyperGrid = HyperGrid(),
                       lambdas: Optional[Sequence[float]] = None) -> Tuple[KernelParams, float]:
    """`k_Θ` hyperparameters and `λ_Θ` maximizing the stage-two log-marginal."""
    T = as_points(thetas)
    y = np.asarray(means, dtype=float).reshape(-1)
    _check_spread(y)
    lambdas = grid.lambdas_theta if lambdas is None else tuple(lambdas)
    cells = [(l, a, lam) for l in grid.lengthscales for a in grid.amplitudes for lam in lambdas]

    def objective(l, a, lam):
        return stage2_log_marginal(replace(template, lengthscale=l, amplitude=a).build(), T, y, variances, lam)

    l, a, lam = _argmax(cells, objective)
    return replace(template, lengthscale=l, amplitude=a), lam


def median_heuristic(samples) -> float:
    """Median pairwise Euclidean distance, a scale for an initial lengthscale."""
    X = as_points(samples)
    if X.shape[0] < 2:
        return 1.0
    median = float(np.median(pdist(X)))
    return median if median > 0 else 1.0


def finite_gradient(objective: Callable[[np.ndarray], float], params: np.ndarray,
                    lower: Optional[Sequence[float]] = None) -> np.ndarray:
    """Central differences with step `1e-4·(1 + |p|)`, one-sided next to a lower bound."""
    gradient = np.empty_like(params)
    for i, p in enumerate(params):
        h = 1e-4 * (1 + abs(p))
        up, down = params.copy(), params.copy()
        up[i] += h
        if lower is not None and p - h < lower[i]:
            gradient[i] = (objective(up) - objective(params)) / h
            continue
        down[i] -= h
        gradient[i] = (objective(up) - objective(down)) / (2 * h)
    return gradient


def stein_c_descent(template: KernelParams, score: ScoreFn, samples, f_vals, *,
                    step: float = 0.05, iterations: int = 300) -> KernelParams:
    """Climb the stage-one log-marginal of a Stein kernel over `(c, log l, log A)`.

    Starts from the constant, lengthscale and amplitude of `template`. Steps are clipped
    to unit gradient norm and `c` is kept nonnegative. Returns the best iterate seen.
    """
    if template.family is not KernelFamily.stein:
        raise InvalidKernel(f'Stein descent needs a Stein kernel family, got {template.family.value}.')
    X = as_points(samples, score.dim)
    f = np.asarray(f_vals, dtype=float).reshape(-1)
    _check_spread(f)

    def unpack(params: np.ndarray) -> KernelParams:
        return replace(template, constant=float(params[0]),
                       lengthscale=float(np.exp(params[1])), amplitude=float(np.exp(params[2])))

    def objective(params: np.ndarray) -> float:
        try:
            return stage1_log_marginal(unpack(params).build(score), X, f)
        except CbqError:
            return -np.inf

    params = np.array([max(template.constant, 0.0), log(template.lengthscale), log(template.amplitude)])
    best, best_value = params.copy(), objective(params)
    if not np.isfinite(best_value):
        raise NonFiniteObjective('Stein log-marginal is not finite at the initial hyperparameters.')
    for _ in range(iterations):
        gradient = finite_gradient(objective, params, lower=(0.0, -np.inf, -np.inf))
        if not np.all(np.isfinite(gradient)):
            break
        params = params + step * gradient / max(1.0, float(np.linalg.norm(gradient)))
        params[0] = max(params[0], 0.0)
        value = objective(params)
        if value > best_value:
            best, best_value = params.copy(), value
    result = unpack(best)
    logger.debug(f'Stein descent: {result.describe()} log-marginal {best_value:.6g}')
    return result
