"""Error, calibration and convergence measures for benchmark results."""
from __future__ import annotations

__all__ = ['rmse', 'calibration_coverage', 'convergence_slope']

from typing import Sequence

import numpy as np
from scipy.special import ndtri

from .errors import DimensionMismatch, EmptyInput


def rmse(estimates, truths) -> float:
    """Root mean squared error.

    >>> rmse([3.0, 4.0], [0.0, 0.0])
    3.5355339059327378
    """
    e = np.asarray(estimates, dtype=float).reshape(-1)
    t = np.asarray(truths, dtype=float).reshape(-1)
    if e.size != t.size:
        raise DimensionMismatch(t.size, e.size)
    if e.size == 0:
        raise EmptyInput('RMSE')
    return float(np.sqrt(np.mean((e - t) ** 2)))


def calibration_coverage(means, stds, truths, levels: Sequence[float]) -> np.ndarray:
    """Fraction of truths inside the central Gaussian credible interval, per level.

    The interval at level `q` is `mean ± z·std` with `z` the `(1 + q)/2` normal quantile,
    so the intervals are nested and coverage is nondecreasing in the level.
    """
    m = np.asarray(means, dtype=float).reshape(-1)
    s = np.asarray(stds, dtype=float).reshape(-1)
    t = np.asarray(truths, dtype=float).reshape(-1)
    if not (m.size == s.size == t.size):
        raise DimensionMismatch(m.size, s.size if s.size != m.size else t.size)
    if m.size == 0:
        raise EmptyInput('Calibration')
    if np.any(s < 0):
        raise ValueError('Posterior standard deviations must be nonnegative.')
    levels = np.asarray(levels, dtype=float)
    if np.any((levels <= 0) | (levels >= 1)):
        raise ValueError(f'Calibration levels must lie in (0, 1), got {levels.tolist()}.')
    distance = np.abs(t - m)
    z = ndtri((1 + levels) / 2)
    return np.array([float(np.mean(distance <= width * s)) for width in z])


def convergence_slope(budgets, errors) -> float:
    """Least-squares slope of `log(error)` against `log(budget)`."""
    b = np.asarray(budgets, dtype=float).reshape(-1)
    e = np.asarray(errors, dtype=float).reshape(-1)
    if b.size != e.size:
        raise DimensionMismatch(b.size, e.size)
    if b.size < 3:
        raise ValueError(f'A convergence slope needs at least 3 points, got {b.size}.')
    if np.any(b <= 0) or np.any(e <= 0):
        raise ValueError('Budgets and errors must be positive to fit a log-log slope.')
    slope, _ = np.polyfit(np.log(b), np.log(e), 1)
    return float(slope)
