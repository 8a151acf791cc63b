"""Stage one: a Bayesian quadrature posterior `N(Î_BQ, σ²_BQ)` for a single integral."""
from __future__ import annotations

__all__ = ['BqPosterior', 'bq_fit']

from dataclasses import dataclass, field

import numpy as np

from ..embeddings import EmbeddingPair
from ..errors import DimensionMismatch, EmbeddingMismatch, EmptyInput, NonFiniteState
from ..kernels import Kernel, as_points
from ..linalg import clamp_variance, factorize


@dataclass(frozen=True)
class BqPosterior:
    mean: float
    variance: float
    sample_count: int
    condition_estimate: float
    jitter: float = 0.0
    weights: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]


def bq_fit(kernel: Kernel, pair: EmbeddingPair, samples, f_vals, reg: float = 0.0,
           prior_mean: float = 0.0) -> BqPosterior:
    """Bayesian quadrature with a constant prior mean.

    ```
    Î_BQ = m + μᵀ(K + λId)⁻¹(f - m)
    σ²_BQ = E[k(X, X')] - μᵀ(K + λId)⁻¹μ
    ```
    The weights `(K + λId)⁻¹μ` are kept on the posterior, so that with `m = 0` the
    mean is `weights · f`.
    """
    if kernel != pair.kernel:
        raise EmbeddingMismatch()
    X = as_points(samples, pair.measure.dim)
    f = np.asarray(f_vals, dtype=float).reshape(-1)
    if X.shape[0] == 0:
        raise EmptyInput('Bayesian quadrature')
    if f.size != X.shape[0]:
        raise DimensionMismatch(X.shape[0], f.size)
    if not np.all(np.isfinite(f)):
        raise NonFiniteState('Integrand values must be finite.')

    embedding = pair.embedding(X)
    factorization = factorize(kernel.matrix(X), reg)
    weights = factorization.solve(embedding)
    mean = prior_mean + float(weights @ (f - prior_mean))

    initial = pair.initial_error(X)
    half = factorization.half_solve(embedding)
    variance = clamp_variance(initial - float(half @ half), initial, factorization)
    return BqPosterior(mean, variance, X.shape[0], factorization.condition_estimate,
                       factorization.jitter, weights)
