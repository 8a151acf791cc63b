"""Probability measures with densities, scores and samplers.

All samplers draw from an explicit `numpy.random.Generator`, so a draw is fully
determined by the generator state.
"""
from __future__ import annotations

__all__ = ['Measure', 'Gaussian', 'Lognormal', 'Gamma', 'Uniform', 'sample_measure']

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from math import isfinite, log, pi

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.special import gammaln

from .errors import InvalidMeasure
from .kernels import as_points


class Measure(ABC):
    """A probability distribution on `ℝ^dim`."""

    @property
    @abstractmethod
    def dim(self) -> int:
        """Dimension of the sample space."""

    @property
    @abstractmethod
    def mean(self) -> np.ndarray:
        """Expectation of the measure."""

    @abstractmethod
    def log_density(self, X) -> np.ndarray:
        """Log-density at each of the `n` points, `-inf` outside the support."""

    def density(self, X) -> np.ndarray:
        return np.exp(self.log_density(X))

    @abstractmethod
    def score(self, X) -> np.ndarray:
        """`∇ log p` at each point, shape `(n, dim)`."""

    @abstractmethod
    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Draw `count` points, shape `(count, dim)`."""


@dataclass(frozen=True, eq=False)
class Gaussian(Measure):
    """`N(m, Σ)` with symmetric positive definite `Σ`."""
    location: np.ndarray
    covariance: np.ndarray
    cholesky_factor: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.location, dtype=float))
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        if m.ndim != 1 or cov.shape != (m.size, m.size):
            raise InvalidMeasure(f'Gaussian mean of shape {m.shape} does not match covariance {cov.shape}.')
        if not np.allclose(cov, cov.T, rtol=1e-12, atol=0):
            raise InvalidMeasure('Gaussian covariance must be symmetric.')
        if np.linalg.eigvalsh(cov).min() <= 1e-12 * np.trace(cov):
            raise InvalidMeasure('Gaussian covariance is degenerate.')
        object.__setattr__(self, 'location', m)
        object.__setattr__(self, 'covariance', cov)
        object.__setattr__(self, 'cholesky_factor', cholesky(cov, lower=True))

    @classmethod
    def standard(cls, dim: int) -> Gaussian:
        return cls(np.zeros(dim), np.eye(dim))

    @property
    def dim(self) -> int:
        return self.location.size

    @property
    def mean(self) -> np.ndarray:
        return self.location

    def log_density(self, X) -> np.ndarray:
        u = self.whiten(X)
        log_det = np.sum(np.log(np.diag(self.cholesky_factor)))
        return -0.5 * self.dim * log(2 * pi) - log_det - 0.5 * np.sum(u ** 2, axis=1)

    def score(self, X) -> np.ndarray:
        X = as_points(X, self.dim)
        return -cho_solve((self.cholesky_factor, True), (X - self.location).T).T

    def sample(self, rng, count):
        return self.transform(rng.standard_normal((count, self.dim)))

    def transform(self, U) -> np.ndarray:
        """Map standard-normal points to this measure: `x = m + L u`."""
        U = as_points(U, self.dim)
        return self.location + U @ self.cholesky_factor.T

    def whiten(self, X) -> np.ndarray:
        """Inverse of `transform`: `u = L⁻¹(x - m)`."""
        X = as_points(X, self.dim)
        return solve_triangular(self.cholesky_factor, (X - self.location).T, lower=True).T


def _positive(measure: str, name: str, value: float):
    if not isfinite(value) or value <= 0:
        raise InvalidMeasure(f'{measure} {name} must be positive and finite, got {value}.')


def _log_of_positive(X) -> tuple:
    x = as_points(X, 1)[:, 0]
    inside = x > 0
    logs = np.full_like(x, -np.inf)
    logs[inside] = np.log(x[inside])
    return x, inside, logs


@dataclass(frozen=True)
class Lognormal(Measure):
    """`exp(N(m̄, σ̄²))` on the positive half-line."""
    log_mean: float
    log_var: float

    def __post_init__(self):
        if not isfinite(self.log_mean):
            raise InvalidMeasure(f'Lognormal log-mean must be finite, got {self.log_mean}.')
        _positive('Lognormal', 'log-variance', self.log_var)

    @property
    def dim(self) -> int:
        return 1

    @property
    def mean(self) -> np.ndarray:
        return np.array([np.exp(self.log_mean + self.log_var / 2)])

    def log_density(self, X):
        x, inside, logs = _log_of_positive(X)
        out = np.full_like(x, -np.inf)
        lx = logs[inside]
        out[inside] = -lx - 0.5 * log(2 * pi * self.log_var) - (lx - self.log_mean) ** 2 / (2 * self.log_var)
        return out

    def score(self, X):
        x = as_points(X, 1)
        return -1 / x - (np.log(x) - self.log_mean) / (self.log_var * x)

    def sample(self, rng, count):
        return np.exp(self.log_mean + np.sqrt(self.log_var) * rng.standard_normal((count, 1)))


@dataclass(frozen=True)
class Gamma(Measure):
    """Gamma distribution with density `∝ x^(α-1) e^(-βx)` (shape α, rate β)."""
    shape: float
    rate: float

    def __post_init__(self):
        _positive('Gamma', 'shape', self.shape)
        _positive('Gamma', 'rate', self.rate)

    @property
    def dim(self) -> int:
        return 1

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.shape / self.rate])

    def log_density(self, X):
        x, inside, logs = _log_of_positive(X)
        out = np.full_like(x, -np.inf)
        out[inside] = (self.shape * log(self.rate) - gammaln(self.shape)
                       + (self.shape - 1) * logs[inside] - self.rate * x[inside])
        return out

    def score(self, X):
        x = as_points(X, 1)
        return (self.shape - 1) / x - self.rate

    def sample(self, rng, count):
        # numpy draws gamma variates with the Marsaglia–Tsang squeeze, boosted for shape < 1
        return rng.gamma(self.shape, 1 / self.rate, size=(count, 1))


@dataclass(frozen=True, eq=False)
class Uniform(Measure):
    """Uniform distribution on the box `[lower, upper]`."""
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.lower, dtype=float))
        b = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if a.shape != b.shape or a.ndim != 1:
            raise InvalidMeasure(f'Uniform bounds have mismatched shapes {a.shape} and {b.shape}.')
        if not np.all(a < b):
            raise InvalidMeasure('Uniform lower bounds must be below upper bounds.')
        object.__setattr__(self, 'lower', a)
        object.__setattr__(self, 'upper', b)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def mean(self) -> np.ndarray:
        return (self.lower + self.upper) / 2

    def log_density(self, X):
        X = as_points(X, self.dim)
        inside = np.all((X >= self.lower) & (X <= self.upper), axis=1)
        return np.where(inside, -np.sum(np.log(self.upper - self.lower)), -np.inf)

    def score(self, X):
        return np.zeros_like(as_points(X, self.dim))

    def sample(self, rng, count):
        return self.lower + (self.upper - self.lower) * rng.random((count, self.dim))


def sample_measure(measure: Measure, rng: np.random.Generator, count: int) -> np.ndarray:
    return measure.sample(rng, count)
