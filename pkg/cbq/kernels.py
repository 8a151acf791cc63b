"""Covariance functions and their Gram matrices.

Every kernel is an immutable dataclass. Points are passed as arrays of shape `(n, d)`;
one-dimensional arrays are read as `n` points in one dimension.

```python
k = Matern32(lengthscale=1.0, amplitude=1.0)
k([0.0], [1.0])  # 0.48358...
gram(k, [0.0, 1.0], [0.0, 1.0])
```

A Langevin Stein kernel wraps a differentiable base kernel with the score of a measure,
which makes its mean embedding under that measure equal to its constant shift:

```python
stein = Stein(Matern32(1.0, 1.0), score_of(Gaussian.standard(1)), constant=0.0)
```
"""
from __future__ import annotations

__all__ = ['Kernel', 'GaussianRbf', 'Matern32', 'LogGaussian', 'Stein', 'ScoreFn', 'Metric',
           'KernelFamily', 'KernelParams', 'eval_kernel', 'gram', 'stein_eval', 'score_of', 'as_points']

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from math import isfinite, sqrt
from typing import TYPE_CHECKING, Callable, Optional, Tuple

import numpy as np

from .errors import DimensionMismatch, InvalidKernel, OutOfDomain

if TYPE_CHECKING:
    from .measures import Measure

SQRT3 = sqrt(3.0)

Derivatives = Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


def as_points(values, dim: Optional[int] = None) -> np.ndarray:
    """Read values as an `(n, d)` array of points."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1) if dim is not None and dim > 1 else arr.reshape(-1, 1)
    elif arr.ndim != 2:
        raise ValueError(f'Points must be at most two-dimensional, got shape {arr.shape}')
    if dim is not None and arr.shape[1] != dim:
        raise DimensionMismatch(dim, arr.shape[1])
    return arr


def _point(value) -> np.ndarray:
    return np.asarray(value, dtype=float).reshape(1, -1)


def _check_positive(kernel: str, name: str, value: float):
    if not isfinite(value) or value <= 0:
        raise InvalidKernel(f'{kernel} {name} must be positive and finite, got {value}.')


def _differences(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    if X.shape[1] != Y.shape[1]:
        raise DimensionMismatch(X.shape[1], Y.shape[1])
    return X[:, None, :] - Y[None, :, :]


class Kernel(ABC):
    """A symmetric positive semi-definite covariance function."""
    amplitude: float

    def __call__(self, x, y) -> float:
        return float(self._matrix(_point(x), _point(y))[0, 0])

    def matrix(self, X, Y=None) -> np.ndarray:
        """The `n × m` Gram matrix between point sets; `Y` defaults to `X`."""
        X = as_points(X)
        Y = X if Y is None else as_points(Y)
        return self._matrix(X, Y)

    @abstractmethod
    def _matrix(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Gram matrix for validated `(n, d)` and `(m, d)` arrays."""


class Differentiable(Kernel):
    """A base kernel with the derivatives needed by the Stein construction."""

    @abstractmethod
    def derivatives(self, X: np.ndarray, Y: np.ndarray) -> Derivatives:
        """Return `(K, ∇_x k, ∇_y k, Σ_i ∂²k/∂x_i∂y_i)` with gradient shapes `(n, m, d)`."""


@dataclass(frozen=True)
class GaussianRbf(Differentiable):
    """`A·exp(-‖x - y‖² / 2l²)`."""
    lengthscale: float
    amplitude: float = 1.0

    def __post_init__(self):
        _check_positive('GaussianRbf', 'lengthscale', self.lengthscale)
        _check_positive('GaussianRbf', 'amplitude', self.amplitude)

    def _matrix(self, X, Y):
        r2 = np.sum(_differences(X, Y) ** 2, axis=-1)
        return self.amplitude * np.exp(-0.5 * r2 / self.lengthscale ** 2)

    def derivatives(self, X, Y):
        diff = _differences(X, Y)
        r2 = np.sum(diff ** 2, axis=-1)
        l2 = self.lengthscale ** 2
        K = self.amplitude * np.exp(-0.5 * r2 / l2)
        grad_x = -K[..., None] * diff / l2
        cross = K * (X.shape[1] / l2 - r2 / l2 ** 2)
        return K, grad_x, -grad_x, cross


class Metric(Enum):
    isotropic = 'isotropic'
    tensor = 'tensor-product'


@dataclass(frozen=True)
class Matern32(Differentiable):
    """Matérn-3/2 normalized so that `k(x, x) = A`.

    The isotropic metric uses the Euclidean distance; the tensor-product metric
    multiplies one-dimensional Matérn-3/2 factors, one per coordinate.
    """
    lengthscale: float
    amplitude: float = 1.0
    metric: Metric = Metric.isotropic

    def __post_init__(self):
        _check_positive('Matern32', 'lengthscale', self.lengthscale)
        _check_positive('Matern32', 'amplitude', self.amplitude)

    @property
    def rate(self) -> float:
        return SQRT3 / self.lengthscale

    def _matrix(self, X, Y):
        diff = _differences(X, Y)
        a = self.rate
        if self.metric is Metric.tensor:
            au = a * np.abs(diff)
            return self.amplitude * np.prod((1 + au) * np.exp(-au), axis=-1)
        ar = a * np.sqrt(np.sum(diff ** 2, axis=-1))
        return self.amplitude * (1 + ar) * np.exp(-ar)

    def derivatives(self, X, Y):
        diff = _differences(X, Y)
        a = self.rate
        A = self.amplitude
        if self.metric is Metric.tensor:
            return self._tensor_derivatives(diff)
        r = np.sqrt(np.sum(diff ** 2, axis=-1))
        decay = np.exp(-a * r)
        K = A * (1 + a * r) * decay
        grad_x = -A * a ** 2 * decay[..., None] * diff
        # the cross term is continuous at r = 0 with limit A·3d/l²
        cross = A * a ** 2 * decay * (diff.shape[-1] - a * r)
        return K, grad_x, -grad_x, cross

    def _tensor_derivatives(self, diff: np.ndarray) -> Derivatives:
        a = self.rate
        A = self.amplitude
        au = a * np.abs(diff)
        decay = np.exp(-au)
        factors = (1 + au) * decay
        K = A * np.prod(factors, axis=-1)
        d = diff.shape[-1]
        grad_x = np.empty_like(diff)
        cross = np.zeros(diff.shape[:-1])
        for i in range(d):
            others = A * np.prod(np.delete(factors, i, axis=-1), axis=-1)
            grad_x[..., i] = -a ** 2 * diff[..., i] * decay[..., i] * others
            cross += a ** 2 * decay[..., i] * (1 - au[..., i]) * others
        return K, grad_x, -grad_x, cross


@dataclass(frozen=True)
class LogGaussian(Kernel):
    """`A·exp(-‖log x - log y‖² / 2l²)` for strictly positive inputs."""
    lengthscale: float
    amplitude: float = 1.0

    def __post_init__(self):
        _check_positive('LogGaussian', 'lengthscale', self.lengthscale)
        _check_positive('LogGaussian', 'amplitude', self.amplitude)

    def _matrix(self, X, Y):
        if np.any(X <= 0) or np.any(Y <= 0):
            raise OutOfDomain('LogGaussian kernel is defined for strictly positive inputs only.')
        r2 = np.sum(_differences(np.log(X), np.log(Y)) ** 2, axis=-1)
        return self.amplitude * np.exp(-0.5 * r2 / self.lengthscale ** 2)


@dataclass(frozen=True, eq=False)
class ScoreFn:
    """The score `x ↦ ∇ log p(x)` of a density on `ℝ^dim`."""
    func: Callable[[np.ndarray], np.ndarray]
    dim: int
    measure: Optional[Measure] = None

    def __call__(self, X) -> np.ndarray:
        X = as_points(X, self.dim)
        return np.asarray(self.func(X), dtype=float).reshape(X.shape)


def score_of(measure: Measure) -> ScoreFn:
    """The score function of a measure."""
    return ScoreFn(measure.score, measure.dim, measure)


@dataclass(frozen=True)
class Stein(Kernel):
    """Langevin Stein kernel of a base kernel plus a constant shift `c`.

    ```
    k_p(x, y) = s(x)ᵀs(y)·k + s(x)ᵀ∇_y k + s(y)ᵀ∇_x k + Σ_i ∂²k/∂x_i∂y_i + c
    ```
    where `s` is the score. Its mean embedding under the scored measure is `c`.
    """
    base: Kernel
    score: ScoreFn
    constant: float = 0.0

    def __post_init__(self):
        if isinstance(self.base, Stein):
            raise InvalidKernel('Stein kernels cannot be nested.')
        if not isinstance(self.base, Differentiable):
            raise InvalidKernel(f'Stein base must be GaussianRbf or Matern32, got {type(self.base).__name__}.')
        if not isfinite(self.constant):
            raise InvalidKernel(f'Stein constant must be finite, got {self.constant}.')

    @property
    def amplitude(self) -> float:  # type: ignore[override]
        return self.base.amplitude

    def _matrix(self, X, Y):
        base: Differentiable = self.base  # type: ignore[assignment]
        if X.shape[1] != self.score.dim:
            raise DimensionMismatch(self.score.dim, X.shape[1])
        K, grad_x, grad_y, cross = base.derivatives(X, Y)
        sx = self.score(X)
        sy = self.score(Y)
        return ((sx @ sy.T) * K
                + np.einsum('id,ijd->ij', sx, grad_y)
                + np.einsum('jd,ijd->ij', sy, grad_x)
                + cross
                + self.constant)


class KernelFamily(Enum):
    rbf = 'rbf'
    matern = 'matern'
    log_gaussian = 'log-gaussian'
    stein = 'stein'


@dataclass(frozen=True)
class KernelParams:
    """Hyperparameters of a kernel family, independent of any measure."""
    family: KernelFamily
    lengthscale: float = 1.0
    amplitude: float = 1.0
    constant: float = 0.0
    metric: Metric = Metric.isotropic

    def build(self, score: Optional[ScoreFn] = None) -> Kernel:
        if self.family is KernelFamily.rbf:
            return GaussianRbf(self.lengthscale, self.amplitude)
        if self.family is KernelFamily.matern:
            return Matern32(self.lengthscale, self.amplitude, self.metric)
        if self.family is KernelFamily.log_gaussian:
            return LogGaussian(self.lengthscale, self.amplitude)
        if score is None:
            raise InvalidKernel('A Stein kernel needs a score function.')
        return Stein(Matern32(self.lengthscale, self.amplitude, self.metric), score, self.constant)

    def describe(self) -> str:
        text = f'{self.family.value}(l={self.lengthscale:.6g},A={self.amplitude:.6g}'
        if self.family is KernelFamily.stein:
            text += f',c={self.constant:.6g}'
        return text + ')'


def eval_kernel(kernel: Kernel, x, y) -> float:
    return kernel(x, y)


def gram(kernel: Kernel, X, Y) -> np.ndarray:
    return kernel.matrix(X, Y)


def stein_eval(base: Kernel, score: ScoreFn, c: float, x, y) -> float:
    return Stein(base, score, c)(x, y)
