from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from logging import getLogger
from typing import TYPE_CHECKING, Optional, Tuple

import numpy as np

from ..errors import DegenerateTargets, NotApplicable, NonFiniteObjective
from ..hyperopt import HyperGrid, grid_search_stage1, median_heuristic, standardize, stein_c_descent
from ..kernels import KernelFamily, KernelParams, as_points
from ..quadrature.baselines import MOBQ_CAP

if TYPE_CHECKING:
    from ..problems import Dataset, Problem

logger = getLogger('cbq')


@dataclass(frozen=True)
class MethodSettings:
    """Choices shared by all benchmark methods.

    `kernel_x` of `None` takes the problem's default family; `lambda_theta` of `None`
    selects `λ_Θ` from the grid.
    """
    grid: HyperGrid = field(default_factory=HyperGrid)
    kernel_x: Optional[KernelFamily] = None
    kernel_theta: KernelFamily = KernelFamily.matern
    lambda_theta: Optional[float] = None
    lambda_x: float = 0.0
    lsmc_orders: Tuple[int, ...] = (1, 2, 3, 4)
    validation_fraction: float = 0.2
    normalized_is: bool = True
    mobq_cap: int = MOBQ_CAP
    stein_step: float = 0.05
    stein_iterations: int = 300


@dataclass(frozen=True)
class Estimates:
    """Estimates of shape `(arms, S)` at the test parameters, with variances when the method has them."""
    means: np.ndarray
    variances: Optional[np.ndarray]
    hypers: str


class Method(ABC):
    """A conditional expectation estimator run on one dataset of a benchmark problem."""
    name: str

    def __init__(self, settings: Optional[MethodSettings] = None):
        self.settings = settings or MethodSettings()

    def check(self, problem: Problem):
        """Raise `NotApplicable` when the method cannot run on the problem."""

    @abstractmethod
    def estimate(self, problem: Problem, data: Dataset, thetas_star: np.ndarray,
                 rng: np.random.Generator) -> Estimates:
        """Estimate `I_c(θ*)` for every arm `c` and test parameter θ*."""

    def kernel_x(self, problem: Problem) -> KernelParams:
        family = self.settings.kernel_x or problem.default_family
        if family not in problem.families:
            supported = ', '.join(f.value for f in problem.families)
            raise NotApplicable(f'{problem.name} supports kernel_x in {{{supported}}}, got {family.value}.')
        return problem.kernel_template(family)

    def __repr__(self):
        return f'<{type(self).__name__} {self.name}>'


@dataclass(frozen=True)
class ThetaScaler:
    """Per-dimension affine map of θ to zero mean and unit spread on the training set."""
    center: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, thetas) -> ThetaScaler:
        T = as_points(thetas)
        scale = T.std(axis=0)
        scale[scale <= 1e-12 * (1 + np.abs(T.mean(axis=0)))] = 1.0
        return cls(T.mean(axis=0), scale)

    def __call__(self, thetas) -> np.ndarray:
        return (as_points(thetas, self.center.size) - self.center) / self.scale


def pooled_standardize(values: np.ndarray) -> Tuple[np.ndarray, float, float]:
    """Standardize integrand values of shape `(T, N)` with one mean and std over all of them."""
    values = np.asarray(values, dtype=float)
    try:
        flat, mean, std = standardize(values.reshape(-1))
    except DegenerateTargets:
        mean = float(values.mean())
        return values - mean, mean, 1.0
    return flat.reshape(values.shape), mean, std


def validation_split(rng: np.random.Generator, count: int, fraction: float,
                     minimum: int = 2) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Training and validation indices, or `None` when too few points remain to train on."""
    held_out = max(minimum, int(round(fraction * count)))
    if count - held_out < 1:
        return None
    order = rng.permutation(count)
    return np.sort(order[held_out:]), np.sort(order[:held_out])


def select_stage1(problem: Problem, template: KernelParams, theta, samples: np.ndarray,
                  f_vals: np.ndarray, settings: MethodSettings) -> KernelParams:
    """Stage-one hyperparameters fitted at a single θ, to be reused for every θ."""
    setup = problem.quadrature_setup(theta, template)
    X = setup.to_space(samples)
    f_vals = setup.integrand_values(samples, f_vals)
    try:
        if template.family is KernelFamily.stein:
            assert setup.score is not None
            start = KernelParams(template.family, lengthscale=median_heuristic(X), metric=template.metric)
            return stein_c_descent(start, setup.score, X, f_vals,
                                   step=settings.stein_step, iterations=settings.stein_iterations)
        return grid_search_stage1(X, f_vals, template, setup.score, settings.grid, settings.lambda_x)
    except (DegenerateTargets, NonFiniteObjective) as e:
        logger.debug(f'{problem.name}: stage-one selection fell back to defaults ({type(e).__name__})')
        return template
