"""Loss of a butterfly call option under a price shock, with a Black–Scholes underlying.

The price `θ` at the shock time is lognormal under `Q`; the price `x` at maturity given
`θ` is lognormal with mean `θ`. The loss of a relative shock `s` at maturity is

```
f(x) = ψ(x) - ψ((1 + s)·x)
ψ(S) = max(S - K₁, 0) + max(S - K₂, 0) - 2·max(S - (K₁ + K₂)/2, 0)
```
and `I(θ)` has a closed form assembled from lognormal call prices.
"""
from __future__ import annotations

__all__ = ['butterfly_payoff', 'finance_integrand', 'call_price', 'FinanceProblem', 'finance_problem']

from math import exp, log, sqrt

import numpy as np
from scipy.special import ndtr

from ..embeddings import EmbeddingPair
from ..errors import OutOfDomain
from ..kernels import KernelFamily, KernelParams, score_of
from ..measures import Lognormal
from .problem_abc import Problem, QuadratureSetup, identity


def butterfly_payoff(S, K1: float = 50.0, K2: float = 150.0) -> np.ndarray:
    """Payoff of the butterfly spread with strikes `K₁ < K₂` at price S.

    >>> float(butterfly_payoff(100.0))
    50.0
    """
    S = np.asarray(S, dtype=float)
    middle = (K1 + K2) / 2
    return np.maximum(S - K1, 0) + np.maximum(S - K2, 0) - 2 * np.maximum(S - middle, 0)


def finance_integrand(x, s: float = 0.2, K1: float = 50.0, K2: float = 150.0) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return butterfly_payoff(x, K1, K2) - butterfly_payoff((1 + s) * x, K1, K2)


def call_price(log_mean: float, log_var: float, strike: float) -> float:
    """`E[max(S - K, 0)]` for `S ~ Lognormal(m̄, σ̄²)`, undiscounted."""
    mean = exp(log_mean + log_var / 2)
    if strike <= 0:
        return mean - strike
    sd = sqrt(log_var)
    d1 = (log_mean + log_var - log(strike)) / sd
    return float(mean * ndtr(d1) - strike * ndtr(d1 - sd))


class FinanceProblem(Problem):
    """`θ ~ Lognormal(log S₀ - σ²η/2, σ²η)`, `x | θ ~ Lognormal(log θ - σ²(ζ-η)/2, σ²(ζ-η))`."""
    name = 'finance'
    dim_x = 1
    dim_theta = 1
    families = (KernelFamily.log_gaussian, KernelFamily.stein)
    default_family = KernelFamily.log_gaussian

    def __init__(self, *, K1: float = 50.0, K2: float = 150.0, shock: float = 0.2, spot: float = 100.0,
                 volatility: float = 0.3, eta: float = 1.0, zeta: float = 2.0,
                 empirical_initial_error: bool = False):
        if not 0 < K1 < K2:
            raise OutOfDomain(f'Strikes must satisfy 0 < K1 < K2, got {K1} and {K2}.')
        if not 0 < eta < zeta:
            raise OutOfDomain(f'Times must satisfy 0 < η < ζ, got {eta} and {zeta}.')
        self.K1 = K1
        self.K2 = K2
        self.shock = shock
        self.spot = spot
        self.volatility = volatility
        self.eta = eta
        self.zeta = zeta
        self.empirical_initial_error = empirical_initial_error
        self.prior = Lognormal(log(spot) - volatility ** 2 * eta / 2, volatility ** 2 * eta)
        self.log_var = volatility ** 2 * (zeta - eta)

    def _theta(self, theta) -> float:
        value = float(np.asarray(theta, dtype=float).reshape(-1)[0])
        if not value > 0:
            raise OutOfDomain(f'Price θ must be positive, got {value}.')
        return value

    def sample_theta(self, rng, count):
        return self.prior.sample(rng, count)

    def conditional_measure(self, theta) -> Lognormal:
        return Lognormal(log(self._theta(theta)) - self.log_var / 2, self.log_var)

    def integrand(self, X, theta, arm=0):
        return finance_integrand(np.asarray(X).reshape(-1), self.shock, self.K1, self.K2)

    def expected_payoff(self, log_mean: float) -> float:
        middle = (self.K1 + self.K2) / 2
        return (call_price(log_mean, self.log_var, self.K1) + call_price(log_mean, self.log_var, self.K2)
                - 2 * call_price(log_mean, self.log_var, middle))

    def ground_truth(self, thetas, arm=0):
        truths = []
        for theta in np.asarray(thetas, dtype=float).reshape(-1):
            log_mean = self.conditional_measure(theta).log_mean
            truths.append(self.expected_payoff(log_mean) - self.expected_payoff(log_mean + log(1 + self.shock)))
        return np.array(truths)

    def expected_loss(self, rng: np.random.Generator, draws: int = 100_000) -> float:
        """`E_Q[max(I(θ), 0)]` by Monte Carlo over θ."""
        return float(np.mean(np.maximum(self.ground_truth(self.sample_theta(rng, draws)), 0)))

    def quadrature_setup(self, theta, params: KernelParams) -> QuadratureSetup:
        measure = self.conditional_measure(theta)
        if params.family is KernelFamily.stein:
            score = score_of(measure)
            return QuadratureSetup(EmbeddingPair(params.build(score), measure), identity, shared=False, score=score)
        pair = EmbeddingPair(params.build(), measure, empirical_initial_error=self.empirical_initial_error)
        return QuadratureSetup(pair, identity, shared=True)

    def describe(self) -> str:
        return f'{self.name}(K1={self.K1:g},K2={self.K2:g},s={self.shock:g})'


def finance_problem(**config) -> FinanceProblem:
    return FinanceProblem(**config)
