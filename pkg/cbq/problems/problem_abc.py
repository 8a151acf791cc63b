from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from typing import Callable, Optional, Tuple

import numpy as np

from ..embeddings import EmbeddingPair, reweight_integrand
from ..metrics import rmse
from ..kernels import KernelFamily, KernelParams, Metric, ScoreFn, score_of
from ..measures import Gaussian, Measure


@dataclass(frozen=True)
class QuadratureSetup:
    """How stage one integrates at a single θ.

    Samples are mapped by `to_space` into the space where `pair` has a closed-form
    embedding. `shared` is true when that space and kernel are the same for every θ,
    which is what a single Gaussian process over all samples needs. With `proposal`,
    `pair.measure` is a tractable stand-in `Q` for `P_θ` and the integrand is
    reweighted by `p_θ/q`.
    """
    pair: EmbeddingPair
    to_space: Callable[[np.ndarray], np.ndarray]
    shared: bool
    score: Optional[ScoreFn] = None
    proposal: Optional[Tuple[Callable, Callable]] = None

    def integrand_values(self, samples: np.ndarray, f_vals: np.ndarray) -> np.ndarray:
        """Values to integrate against `pair.measure` at the raw samples."""
        if self.proposal is None:
            return f_vals
        target, proposal = self.proposal
        return reweight_integrand(lambda _: f_vals, target, proposal)(samples)


@dataclass(frozen=True)
class Dataset:
    """Parameters `(T, p)`, samples `(T, N, d)` and integrand values `(arms, T, N)`."""
    thetas: np.ndarray
    samples: np.ndarray
    values: np.ndarray

    @property
    def size(self) -> Tuple[int, int]:
        T, N = self.samples.shape[:2]
        return N, T


def identity(X: np.ndarray) -> np.ndarray:
    return X


class Problem(ABC):
    """A family of integrals `I(θ) = E_{X~P_θ}[f(X, θ)]` with θ drawn from `Q`."""
    name: str
    dim_x: int
    dim_theta: int
    arms: int = 1
    theta_dependent: bool = False
    families: Tuple[KernelFamily, ...]
    default_family: KernelFamily

    @abstractmethod
    def sample_theta(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Draw `count` parameters from `Q`, shape `(count, dim_theta)`."""

    @abstractmethod
    def conditional_measure(self, theta) -> Measure:
        """`P_θ`."""

    @abstractmethod
    def integrand(self, X: np.ndarray, theta, arm: int = 0) -> np.ndarray:
        """`f(x, θ)` at each of the points in X."""

    @abstractmethod
    def ground_truth(self, thetas, arm: int = 0) -> np.ndarray:
        """`I(θ)` at each parameter, exact or a seed-pinned Monte Carlo reference."""

    @abstractmethod
    def quadrature_setup(self, theta, params: KernelParams) -> QuadratureSetup:
        """The stage-one embedding pair at θ for a kernel family with hyperparameters."""

    def log_density(self, X, theta) -> np.ndarray:
        return self.conditional_measure(theta).log_density(X)

    def density(self, X, theta) -> np.ndarray:
        return np.exp(self.log_density(X, theta))

    def score(self, theta) -> ScoreFn:
        return score_of(self.conditional_measure(theta))

    def prepare(self):
        """Build anything shared by concurrent experiment cells."""

    def kernel_template(self, family: Optional[KernelFamily] = None) -> KernelParams:
        return KernelParams(family or self.default_family)

    def test_thetas(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return self.sample_theta(rng, count)

    def sample(self, rng: np.random.Generator, N: int, T: int) -> Dataset:
        """`θ_{1:T} ~ Q`, then `x^t_{1:N} ~ P_θt`, then `f` at every sample and arm."""
        thetas = self.sample_theta(rng, T)
        samples = np.stack([self.conditional_measure(theta).sample(rng, N) for theta in thetas])
        values = np.stack([np.stack([self.integrand(X, theta, arm) for X, theta in zip(samples, thetas)])
                           for arm in range(self.arms)])
        return Dataset(thetas, samples, values)

    def error(self, thetas, estimates: np.ndarray) -> float:
        """Error of estimates with shape `(arms, S)` at the test parameters."""
        return rmse(estimates[0], self.ground_truth(thetas))

    def describe(self) -> str:
        return self.name


def gaussian_setup(measure: Gaussian, params: KernelParams, to_space: Callable = identity,
                   shared: bool = True) -> QuadratureSetup:
    """Stage-one setup for a Gaussian `P_θ` given in the space `to_space` maps into.

    Matérn kernels go through the inverse transform onto the standard normal, which
    depends on θ; Stein kernels carry the score of `P_θ`.
    """
    if params.family is KernelFamily.matern:
        tensor = replace(params, metric=Metric.tensor)
        return QuadratureSetup(EmbeddingPair(tensor.build(), Gaussian.standard(measure.dim)),
                               lambda X: measure.whiten(to_space(X)), shared=False)
    if params.family is KernelFamily.stein:
        score = score_of(measure)
        return QuadratureSetup(EmbeddingPair(params.build(score), measure), to_space, shared=False, score=score)
    return QuadratureSetup(EmbeddingPair(params.build(), measure), to_space, shared=shared)
