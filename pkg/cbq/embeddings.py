"""Kernel mean embeddings `μ(x) = E[k(X, x)]` and initial errors `E[k(X, X')]`.

Closed forms are available for these (kernel, measure) pairs:

| kernel | measure |
|--------|---------|
| `GaussianRbf` | `Gaussian` |
| `LogGaussian` | `Lognormal` |
| `Matern32` (tensor-product metric) | standard `Gaussian` |
| `Stein` | the measure its score was derived from |

Other measures are reached through `inverse_transform` (Gaussians onto the standard
normal) or `reweight_integrand` (importance sampling onto a tractable measure).
`numeric_expectation` and `numeric_kme_oracle` compute the same quantities by adaptive
quadrature or Monte Carlo and serve as a check on the closed forms.
"""
from __future__ import annotations

__all__ = ['EmbeddingPair', 'kme', 'initial_error', 'inverse_transform', 'reweight_integrand',
           'numeric_kme_oracle', 'numeric_expectation', 'Estimate', 'matern_normal_embedding']

from dataclasses import dataclass
from math import exp, sqrt, pi
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.integrate import dblquad, quad
from scipy.special import log_ndtr

from .errors import InvalidMeasure, OutOfDomain, ToleranceNotReached, UnsupportedPair
from .kernels import GaussianRbf, Kernel, LogGaussian, Matern32, Metric, Stein, as_points
from .measures import Gamma, Gaussian, Lognormal, Measure, Uniform

Integrand = Callable[[np.ndarray], np.ndarray]

MIN_HERMITE_NODES = 64


def _is_standard_normal(measure: Measure) -> bool:
    return (isinstance(measure, Gaussian)
            and np.allclose(measure.location, 0.0, atol=1e-12)
            and np.allclose(measure.covariance, np.eye(measure.dim), rtol=0, atol=1e-12))


@dataclass(frozen=True, eq=False)
class EmbeddingPair:
    """A kernel together with a measure whose embedding is tractable.

    `empirical_initial_error` switches log-Gaussian pairs to the sample average of the
    embedding instead of the exact value. `hermite_nodes` switches Matérn pairs to
    Gauss–Hermite quadrature instead of the closed form.
    """
    kernel: Kernel
    measure: Measure
    empirical_initial_error: bool = False
    hermite_nodes: Optional[int] = None

    def __post_init__(self):
        k, m = self.kernel, self.measure
        supported = (
                (isinstance(k, GaussianRbf) and isinstance(m, Gaussian))
                or (isinstance(k, LogGaussian) and isinstance(m, Lognormal))
                or (isinstance(k, Matern32) and k.metric is Metric.tensor and _is_standard_normal(m))
                or (isinstance(k, Stein) and k.score.dim == m.dim
                    and (k.score.measure is None or k.score.measure is m))
        )
        if not supported:
            raise UnsupportedPair(k, m)

    def embedding(self, X) -> np.ndarray:
        """`μ` at each of the points in X."""
        k, m = self.kernel, self.measure
        X = as_points(X, m.dim)
        if isinstance(k, Stein):
            return np.full(X.shape[0], k.constant)
        if isinstance(k, GaussianRbf):
            assert isinstance(m, Gaussian)
            return _rbf_gaussian(k, m, X)
        if isinstance(k, LogGaussian):
            assert isinstance(m, Lognormal)
            if np.any(X <= 0):
                raise OutOfDomain('Log-Gaussian embedding is defined for positive points only.')
            s2 = m.log_var + k.lengthscale ** 2
            return (k.amplitude / sqrt(1 + m.log_var / k.lengthscale ** 2)
                    * np.exp(-(np.log(X[:, 0]) - m.log_mean) ** 2 / (2 * s2)))
        assert isinstance(k, Matern32)
        factors = matern_normal_embedding(X, k.rate, self.hermite_nodes)
        return k.amplitude * np.prod(factors, axis=1)

    def initial_error(self, samples=None) -> float:
        """`E[k(X, X')]` for independent `X, X'` from the measure."""
        k, m = self.kernel, self.measure
        if isinstance(k, Stein):
            return k.constant
        if isinstance(k, GaussianRbf):
            assert isinstance(m, Gaussian)
            scaled = np.eye(m.dim) + 2 * m.covariance / k.lengthscale ** 2
            return k.amplitude / sqrt(np.linalg.det(scaled))
        if isinstance(k, LogGaussian):
            assert isinstance(m, Lognormal)
            if self.empirical_initial_error:
                if samples is None:
                    raise UnsupportedPair(k, m)
                return float(np.mean(self.embedding(samples)))
            return k.amplitude * k.lengthscale / sqrt(k.lengthscale ** 2 + 2 * m.log_var)
        assert isinstance(k, Matern32)
        b = k.rate * sqrt(2)
        per_dim = 2 * ((1 - b ** 2) * exp(b ** 2 / 2 + float(log_ndtr(-b))) + b / sqrt(2 * pi))
        return k.amplitude * per_dim ** m.dim


def _rbf_gaussian(k: GaussianRbf, m: Gaussian, X: np.ndarray) -> np.ndarray:
    l2 = k.lengthscale ** 2
    d = m.dim
    scale = np.linalg.det(np.eye(d) + m.covariance / l2) ** -0.5
    centered = X - m.location
    solved = np.linalg.solve(m.covariance + l2 * np.eye(d), centered.T).T
    return k.amplitude * scale * np.exp(-0.5 * np.sum(centered * solved, axis=1))


def matern_normal_embedding(X, rate: float, hermite_nodes: Optional[int] = None) -> np.ndarray:
    """Per-coordinate `E[(1 + a|Z - x|)·exp(-a|Z - x|)]` for `Z ~ N(0, 1)`, same shape as X."""
    x = np.asarray(X, dtype=float)
    a = rate
    if hermite_nodes is not None:
        if hermite_nodes < MIN_HERMITE_NODES:
            raise ValueError(f'Gauss–Hermite needs at least {MIN_HERMITE_NODES} nodes, got {hermite_nodes}.')
        nodes, weights = hermegauss(hermite_nodes)
        au = a * np.abs(nodes - x[..., None])
        return np.sum(weights * (1 + au) * np.exp(-au), axis=-1) / sqrt(2 * pi)
    phi = np.exp(-x ** 2 / 2) / sqrt(2 * pi)
    upper = (1 - a ** 2 - a * x) * np.exp(a * x + a ** 2 / 2 + log_ndtr(-x - a))
    lower = (1 - a ** 2 + a * x) * np.exp(-a * x + a ** 2 / 2 + log_ndtr(x - a))
    return upper + lower + 2 * a * phi


def kme(pair: EmbeddingPair, x) -> float:
    """The kernel mean embedding at a single point."""
    return float(pair.embedding(as_points(x, pair.measure.dim)[:1])[0])


def initial_error(pair: EmbeddingPair, samples=None) -> float:
    return pair.initial_error(samples)


def inverse_transform(measure: Gaussian, u) -> np.ndarray:
    """Map standard-normal points onto `measure` through its Cholesky factor."""
    return measure.transform(u)


def reweight_integrand(f: Integrand, p: Integrand, q: Integrand) -> Integrand:
    """The importance-sampling integrand `g = f·p/q`, so that `E_Q[g] = E_P[f]`."""

    def reweighted(X):
        proposal = np.asarray(q(X), dtype=float)
        if np.any(proposal <= 0):
            raise OutOfDomain('Proposal density vanishes at a sampled point.')
        return np.asarray(f(X), dtype=float) * np.asarray(p(X), dtype=float) / proposal

    return reweighted


@dataclass(frozen=True)
class Estimate:
    """A numerical value with its error bound (quadrature) or standard error (Monte Carlo)."""
    value: float
    error: float
    monte_carlo: bool


def _support_1d(measure: Measure):
    """Integration range and a change of variables for one-dimensional measures."""
    if isinstance(measure, Gaussian):
        m, s = float(measure.location[0]), sqrt(float(measure.covariance[0, 0]))
        return m - 12 * s, m + 12 * s, lambda u: u
    if isinstance(measure, Lognormal):
        s = sqrt(measure.log_var)
        return measure.log_mean - 12 * s, measure.log_mean + 12 * s, np.exp
    if isinstance(measure, Gamma):
        spread = sqrt(measure.shape) / measure.rate
        return 0.0, float(measure.mean[0]) + 40 * spread, lambda u: u
    if isinstance(measure, Uniform):
        return float(measure.lower[0]), float(measure.upper[0]), lambda u: u
    raise InvalidMeasure(f"No numerical integration rule for {type(measure).__name__}.")


def numeric_expectation(func: Integrand, measure: Measure, tol: float = 1e-8, *,
                        monte_carlo: bool = False, draws: int = 10 ** 6,
                        rng: Optional[np.random.Generator] = None,
                        breakpoints=()) -> Estimate:
    """`E[func(X)]` under the measure by adaptive quadrature (dimension ≤ 2) or Monte Carlo."""
    if monte_carlo or measure.dim > 2:
        rng = rng if rng is not None else np.random.default_rng(0)
        total, total_sq, seen = 0.0, 0.0, 0
        while seen < draws:
            chunk = min(100_000, draws - seen)
            values = np.asarray(func(measure.sample(rng, chunk)), dtype=float)
            total += values.sum()
            total_sq += np.sum(values ** 2)
            seen += chunk
        mean = total / seen
        variance = max(total_sq / seen - mean ** 2, 0.0)
        return Estimate(mean, sqrt(variance / seen), monte_carlo=True)

    if measure.dim == 1:
        lo, hi, to_x = _support_1d(measure)
        points = [u for u in (np.log(b) if isinstance(measure, Lognormal) else b for b in breakpoints)
                  if lo < u < hi]

        def integrand_1d(u):
            x = np.array([[to_x(u)]])
            density = measure.density(x)[0]
            jacobian = x[0, 0] if isinstance(measure, Lognormal) else 1.0
            return float(func(x)[0]) * density * jacobian if density > 0 else 0.0

        value, error = quad(integrand_1d, lo, hi, epsabs=tol, epsrel=0, limit=500, points=points or None)
    else:
        if isinstance(measure, Gaussian):
            spread = 10 * np.sqrt(np.diag(measure.covariance))
            lo, hi = measure.location - spread, measure.location + spread
        elif isinstance(measure, Uniform):
            lo, hi = measure.lower, measure.upper
        else:
            raise InvalidMeasure(f"No numerical integration rule for {type(measure).__name__}.")

        def integrand_2d(y, x):
            point = np.array([[x, y]])
            return float(func(point)[0]) * float(measure.density(point)[0])

        value, error = dblquad(integrand_2d, lo[0], hi[0], lo[1], hi[1], epsabs=tol, epsrel=0)
    if error > tol:
        raise ToleranceNotReached(f'Quadrature error bound {error:.3g} exceeds tolerance {tol:.3g}.')
    return Estimate(value, error, monte_carlo=False)


def numeric_kme_oracle(kernel: Kernel, measure: Measure, x, tol: float = 1e-8, *,
                       monte_carlo: bool = False, draws: int = 10 ** 6,
                       rng: Optional[np.random.Generator] = None) -> Estimate:
    """Brute-force `μ(x) = E[k(X, x)]`, independent of any closed form."""
    point = as_points(x, measure.dim)[:1]
    breakpoints = [float(point[0, 0])] if measure.dim == 1 else []
    return numeric_expectation(lambda X: kernel.matrix(X, point)[:, 0], measure, tol,
                               monte_carlo=monte_carlo, draws=draws, rng=rng, breakpoints=breakpoints)


