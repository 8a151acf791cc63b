"""Cholesky solves against regularized Gram matrices, shared by both quadrature stages."""
from __future__ import annotations

__all__ = ['Factorization', 'factorize', 'regularized_cholesky_solve', 'clamp_variance',
           'JITTER_LADDER', 'JitterEvents', 'count_jitter']

import threading
from contextlib import contextmanager
from dataclasses import dataclass
from logging import getLogger
from typing import Iterator, Union

import numpy as np
from numpy.linalg import LinAlgError
from scipy.linalg import cho_solve, cholesky, solve_triangular

from .errors import DimensionMismatch, FactorizationFailed, NegativeVariance

logger = getLogger('cbq')

JITTER_LADDER = (1e-10, 1e-8, 1e-6)

Regularizer = Union[float, np.ndarray]


class JitterEvents:
    """Number of factorizations in the current thread that needed jitter."""

    def __init__(self):
        self.count = 0


_local = threading.local()


@contextmanager
def count_jitter() -> Iterator[JitterEvents]:
    """Count jitter escalations in this thread while the block runs.

    ```python
    with count_jitter() as events:
        factorize(K)
    events.count
    ```
    """
    events = JitterEvents()
    previous = getattr(_local, 'events', None)
    _local.events = events
    try:
        yield events
    finally:
        _local.events = previous


@dataclass(frozen=True)
class Factorization:
    """Lower Cholesky factor of `K + diag(reg) + jitter·Id`."""
    lower: np.ndarray
    jitter: float

    @property
    def size(self) -> int:
        return self.lower.shape[0]

    def solve(self, B) -> np.ndarray:
        return cho_solve((self.lower, True), B)

    def half_solve(self, B) -> np.ndarray:
        """`L⁻¹B`, so that `Bᵀ(K + reg)⁻¹B = (L⁻¹B)ᵀ(L⁻¹B)`."""
        return solve_triangular(self.lower, B, lower=True)

    @property
    def log_det(self) -> float:
        return float(2 * np.sum(np.log(np.diag(self.lower))))

    @property
    def condition_estimate(self) -> float:
        diagonal = np.diag(self.lower)
        return float((diagonal.max() / diagonal.min()) ** 2)


def factorize(K, reg: Regularizer = 0.0) -> Factorization:
    """Factorize `K + diag(reg)`, escalating a diagonal jitter while Cholesky fails.

    `reg` is either a scalar added uniformly or a vector with one entry per row.
    Jitter steps are `JITTER_LADDER` scaled by `trace(K)/n`.
    """
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise DimensionMismatch(K.shape[0], K.shape[-1])
    n = K.shape[0]
    diagonal = np.broadcast_to(np.asarray(reg, dtype=float), (n,))
    regularized = K + np.diag(diagonal)
    trace = float(np.trace(K))
    scale = trace / n if n and trace > 0 else 1.0
    for jitter in (0.0, *(step * scale for step in JITTER_LADDER)):
        try:
            lower = cholesky(regularized + jitter * np.eye(n), lower=True)
        except LinAlgError:
            continue
        if jitter > 0:
            logger.warning(f'Cholesky needed jitter {jitter:.3g} for a {n}×{n} Gram matrix')
            events = getattr(_local, 'events', None)
            if events is not None:
                events.count += 1
        return Factorization(lower, jitter)
    raise FactorizationFailed(JITTER_LADDER[-1] * scale)


def regularized_cholesky_solve(K, reg: Regularizer, B) -> np.ndarray:
    """`(K + reg·Id)⁻¹B` by Cholesky factorization.

    >>> regularized_cholesky_solve(np.diag([2.0, 2.0]), 2.0, np.array([4.0, 4.0]))
    array([1., 1.])
    """
    return factorize(K, reg).solve(np.asarray(B, dtype=float))


def clamp_variance(value: float, scale: float, factorization: Factorization) -> float:
    """Clamp a slightly negative posterior variance to zero.

    The tolerance is `1e-10·scale`, widened to machine precision times the condition
    estimate of the factorization, since cancellation error grows with it.
    """
    if value >= 0:
        return value
    tolerance = abs(scale) * max(1e-10, np.finfo(float).eps * factorization.condition_estimate)
    if value < -tolerance:
        raise NegativeVariance(value, scale)
    return 0.0
