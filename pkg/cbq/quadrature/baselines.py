"""Comparison estimators for conditional expectations.

- `mc_estimate`: Monte Carlo average at a single θ.
- `is_estimate`: importance sampling from all the stage-one samples, in the verbatim
  `1/T` normalization or the consistent `1/(NT)` one.
- `lsmc_fit`/`lsmc_predict`: Monte Carlo means regressed on a total-degree polynomial in θ.
- `klsmc_fit`/`klsmc_predict`: Monte Carlo means regressed by kernel ridge regression.
- `mobq_fit`/`mobq_predict`/`mobq_estimate`: one Gaussian process over all `N·T` samples at once.
"""
from __future__ import annotations

__all__ = ['mc_estimate', 'is_estimate', 'Polynomial', 'KernelRidge', 'lsmc_fit', 'lsmc_predict',
           'klsmc_fit', 'klsmc_predict', 'MobqModel', 'mobq_fit', 'mobq_predict', 'mobq_estimate',
           'monomial_powers', 'MOBQ_CAP']

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..embeddings import EmbeddingPair
from ..errors import CapExceeded, DimensionMismatch, EmbeddingMismatch, EmptyInput, OutOfDomain, RankDeficient
from ..kernels import Kernel, as_points
from ..linalg import regularized_cholesky_solve
from .cbq_stage2 import CbqModel, cbq_predict_joint, fit_heteroscedastic

MOBQ_CAP = 3000


def mc_estimate(f_vals) -> float:
    f = np.asarray(f_vals, dtype=float).reshape(-1)
    if f.size == 0:
        raise EmptyInput('Monte Carlo')
    return float(f.mean())


def is_estimate(f_vals, target_log_density, proposal_log_density, *, normalized: bool = True) -> float:
    """Importance sampling estimate at θ* from samples drawn at θ_{1:T}.

    All arguments have shape `(T, N)`: integrand values, `log p_θ*(x_i^t)` and
    `log p_θt(x_i^t)`. The verbatim form divides the weighted sum by `T`, the normalized
    form by `N·T`.
    """
    f = np.atleast_2d(np.asarray(f_vals, dtype=float))
    log_p = np.atleast_2d(np.asarray(target_log_density, dtype=float))
    log_q = np.atleast_2d(np.asarray(proposal_log_density, dtype=float))
    if f.size == 0:
        raise EmptyInput('Importance sampling')
    if f.shape != log_p.shape or f.shape != log_q.shape:
        raise DimensionMismatch(f.size, log_q.size if f.shape != log_q.shape else log_p.size)
    if np.any(np.isneginf(log_q)):
        raise OutOfDomain('Proposal density vanishes at a sample.')
    weighted = float(np.sum(np.exp(log_p - log_q) * f))
    T, N = f.shape
    return weighted / (N * T) if normalized else weighted / T


def monomial_powers(dim: int, order: int) -> List[Tuple[int, ...]]:
    """Variable index tuples of every monomial of total degree ≤ order, constant first."""
    return [powers for degree in range(order + 1)
            for powers in combinations_with_replacement(range(dim), degree)]


@dataclass(frozen=True)
class Polynomial:
    order: int
    coefficients: np.ndarray
    ridge: float
    center: np.ndarray
    scale: np.ndarray
    column_scale: np.ndarray
    powers: Tuple[Tuple[int, ...], ...]

    def design(self, thetas) -> np.ndarray:
        Z = (as_points(thetas, self.center.size) - self.center) / self.scale
        columns = [np.prod(Z[:, list(p)], axis=1) if p else np.ones(Z.shape[0]) for p in self.powers]
        return np.column_stack(columns) / self.column_scale

    def __call__(self, thetas) -> np.ndarray:
        return self.design(thetas) @ self.coefficients


def lsmc_fit(thetas, mc_means, order: int, ridge: float = 0.0) -> Polynomial:
    """Least-squares regression of Monte Carlo means on all monomials of degree ≤ order.

    Inputs are centered and scaled per coordinate and design columns scaled to unit
    variance before solving; the intercept is never penalized.
    """
    if order not in (1, 2, 3, 4):
        raise ValueError(f'Polynomial order must be 1, 2, 3 or 4, got {order}.')
    if ridge < 0:
        raise ValueError(f'Ridge must be nonnegative, got {ridge}.')
    T = as_points(thetas)
    y = np.asarray(mc_means, dtype=float).reshape(-1)
    if y.size != T.shape[0]:
        raise DimensionMismatch(T.shape[0], y.size)
    center = T.mean(axis=0)
    scale = T.std(axis=0)
    scale[scale == 0] = 1.0
    powers = tuple(monomial_powers(T.shape[1], order))
    unscaled = Polynomial(order, np.empty(0), ridge, center, scale, np.ones(len(powers)), powers)
    raw = unscaled.design(T)
    column_scale = raw.std(axis=0)
    column_scale[0] = 1.0
    column_scale[column_scale == 0] = 1.0
    design = raw / column_scale

    if ridge == 0:
        if T.shape[0] < len(powers) or np.linalg.matrix_rank(design) < len(powers):
            raise RankDeficient(f'{T.shape[0]} parameter values cannot determine '
                                f'{len(powers)} coefficients of a degree-{order} polynomial.')
        coefficients = np.linalg.lstsq(design, y, rcond=None)[0]
    else:
        penalty = ridge * np.eye(len(powers))
        penalty[0, 0] = 0.0
        coefficients = np.linalg.solve(design.T @ design + penalty, design.T @ y)
    return Polynomial(order, coefficients, ridge, center, scale, column_scale, powers)


def lsmc_predict(model: Polynomial, theta_star) -> np.ndarray:
    return model(theta_star)


@dataclass(frozen=True)
class KernelRidge:
    """Kernel ridge regression: the stage-two regression with no stage-one noise."""
    model: CbqModel

    @property
    def kernel(self) -> Kernel:
        return self.model.kernel

    @property
    def reg(self) -> float:
        return self.model.reg

    @property
    def dual_coefficients(self) -> np.ndarray:
        return self.model.alpha


def klsmc_fit(thetas, mc_means, kernel: Kernel, reg: float) -> KernelRidge:
    y = np.asarray(mc_means, dtype=float).reshape(-1)
    return KernelRidge(fit_heteroscedastic(thetas, y, np.zeros(y.size), kernel, reg))


def klsmc_predict(model: KernelRidge, theta_star) -> np.ndarray:
    return cbq_predict_joint(model.model, theta_star)[0]


@dataclass(frozen=True)
class MobqModel:
    """A single Gaussian process over every sample, optionally with a product kernel in θ."""
    samples: np.ndarray
    thetas: Optional[np.ndarray]
    kernel_x: Kernel
    kernel_theta: Optional[Kernel]
    alpha: np.ndarray = field(repr=False)


def mobq_fit(samples, f_vals, kernel_x: Kernel, *, thetas=None, kernel_theta: Optional[Kernel] = None,
             reg: float = 0.0, cap: int = MOBQ_CAP) -> MobqModel:
    """Fit on samples of shape `(T, N, d)` and values of shape `(T, N)`.

    With `kernel_theta` and `thetas` of shape `(T, p)`, the Gram matrix is the
    elementwise product `k_X(x, x') · k_Θ(θ, θ')` over all `N·T` pairs.
    """
    X = np.asarray(samples, dtype=float)
    if X.ndim == 2:
        X = X[..., None]
    f = np.asarray(f_vals, dtype=float)
    if f.shape != X.shape[:2]:
        raise DimensionMismatch(X.shape[0] * X.shape[1], f.size)
    T, N, d = X.shape
    if N * T > cap:
        raise CapExceeded(N * T, cap)
    flat = X.reshape(N * T, d)
    K = kernel_x.matrix(flat)
    repeated = None
    if kernel_theta is not None:
        if thetas is None:
            raise ValueError('A kernel over θ needs the θ of every sample.')
        repeated = np.repeat(as_points(thetas), N, axis=0)
        if repeated.shape[0] != N * T:
            raise DimensionMismatch(T, as_points(thetas).shape[0])
        K = K * kernel_theta.matrix(repeated)
    return MobqModel(flat, repeated, kernel_x, kernel_theta, regularized_cholesky_solve(K, reg, f.reshape(-1)))


def mobq_predict(model: MobqModel, pair: EmbeddingPair, theta_star=None) -> float:
    """Posterior mean of `I(θ*)` where `pair.measure` is `P_θ*`."""
    if pair.kernel != model.kernel_x:
        raise EmbeddingMismatch()
    embedding = pair.embedding(model.samples)
    if model.kernel_theta is not None:
        if theta_star is None:
            raise ValueError('A kernel over θ needs the θ* to predict at.')
        point = as_points(theta_star, model.thetas.shape[1])[:1]  # type: ignore[union-attr]
        embedding = embedding * model.kernel_theta.matrix(model.thetas, point)[:, 0]
    return float(embedding @ model.alpha)


def mobq_estimate(samples, f_vals, kernel_x: Kernel, pairs: Sequence[EmbeddingPair], *, thetas=None,
                  kernel_theta: Optional[Kernel] = None, thetas_star=None, reg: float = 0.0,
                  cap: int = MOBQ_CAP) -> np.ndarray:
    """Fit once, then the posterior mean at every θ*, where `pairs[s]` embeds `P_θ*` of row `s`."""
    model = mobq_fit(samples, f_vals, kernel_x, thetas=thetas, kernel_theta=kernel_theta, reg=reg, cap=cap)
    stars: Sequence = [None] * len(pairs)
    if thetas_star is not None:
        stars = as_points(thetas_star, model.thetas.shape[1] if model.thetas is not None else None)
        if len(stars) != len(pairs):
            raise DimensionMismatch(len(pairs), len(stars))
    return np.array([mobq_predict(model, pair, star) for pair, star in zip(pairs, stars)])
