"""Sensitivity of the expected epidemic peak to a Gamma prior on the infection rate.

The epidemic follows the deterministic SIR equations, integrated with fixed-step RK4:

```
dS/dr = -x·S·I/n    dI/dr = x·S·I/n - γ·I    dR/dr = γ·I
```
with population `n`. The integrand is the peak number of infected individuals.
"""
from __future__ import annotations

__all__ = ['SirTrajectory', 'sir_solve', 'sir_peak', 'peak_infections', 'SirProblem', 'sir_problem']

from dataclasses import dataclass
from logging import getLogger
from typing import TYPE_CHECKING, Optional, Tuple

import numpy as np

from ..errors import NonFiniteState, OutOfDomain
from ..kernels import KernelFamily, KernelParams, score_of
from ..embeddings import EmbeddingPair
from ..measures import Gamma, Gaussian, Uniform
from .problem_abc import Problem, QuadratureSetup, identity

if TYPE_CHECKING:
    from ..cache import TruthCache

logger = getLogger('cbq')


@dataclass(frozen=True)
class SirTrajectory:
    """Compartment sizes on the time grid, each of shape `(steps + 1, n_rates)`."""
    times: np.ndarray
    susceptible: np.ndarray
    infected: np.ndarray
    recovered: np.ndarray


def _check_inputs(x: np.ndarray, gamma: float, population: float, initial_infected: float, dt: float):
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise OutOfDomain('Infection rates must be finite and nonnegative.')
    if gamma < 0 or dt <= 0:
        raise OutOfDomain(f'Recovery rate must be nonnegative and step positive, got γ={gamma}, dt={dt}.')
    if not 0 < initial_infected < population:
        raise OutOfDomain(f'Initial infections {initial_infected} must lie in (0, {population}).')


def _rk4_steps(x: np.ndarray, gamma: float, population: float, initial_infected: float,
               horizon_days: float, dt: float):
    """Yield `(S, I, R)` at every point of the time grid, starting at day zero."""
    _check_inputs(x, gamma, population, initial_infected, dt)

    def rates(s, i):
        infections = x * s * i / population
        recoveries = gamma * i
        return -infections, infections - recoveries, recoveries

    s = np.full(x.shape, population - initial_infected)
    i = np.full(x.shape, float(initial_infected))
    r = np.zeros(x.shape)
    yield s, i, r
    for _ in range(int(round(horizon_days / dt))):
        k1 = rates(s, i)
        k2 = rates(s + dt / 2 * k1[0], i + dt / 2 * k1[1])
        k3 = rates(s + dt / 2 * k2[0], i + dt / 2 * k2[1])
        k4 = rates(s + dt * k3[0], i + dt * k3[1])
        s = s + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        i = i + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        r = r + dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(i))):
            raise NonFiniteState('SIR state diverged.')
        yield s, i, r


def sir_solve(x, gamma: float = 0.05, population: float = 1e6, initial_infected: float = 10,
              horizon_days: float = 150, dt: float = 0.1) -> SirTrajectory:
    """The full trajectory for each infection rate in x."""
    rates = np.atleast_1d(np.asarray(x, dtype=float))
    states = list(_rk4_steps(rates, gamma, population, initial_infected, horizon_days, dt))
    S, I, R = (np.stack(compartment) for compartment in zip(*states))
    return SirTrajectory(dt * np.arange(len(states)), S, I, R)


def sir_peak(trajectory: SirTrajectory) -> np.ndarray:
    return trajectory.infected.max(axis=0)


def peak_infections(x, gamma: float = 0.05, population: float = 1e6, initial_infected: float = 10,
                    horizon_days: float = 150, dt: float = 0.1, chunk: int = 50_000) -> np.ndarray:
    """`sir_peak(sir_solve(x))` without keeping the trajectory in memory."""
    rates = np.atleast_1d(np.asarray(x, dtype=float)).reshape(-1)
    peaks = np.empty_like(rates)
    for start in range(0, rates.size, chunk):
        part = rates[start:start + chunk]
        peak = np.zeros_like(part)
        for _, i, _ in _rk4_steps(part, gamma, population, initial_infected, horizon_days, dt):
            np.maximum(peak, i, out=peak)
        peaks[start:start + chunk] = peak
    return peaks


def _theta_entropy(theta: float) -> int:
    return int(np.float64(theta).view(np.uint64))


class SirProblem(Problem):
    """`θ ~ Unif(2, 9)`, infection rate `x ~ Gamma(θ, rate ξ)`, `f(x)` the epidemic peak.

    No closed form exists, so `I(θ)` is a Monte Carlo average over `truth_draws` rates,
    seeded by θ itself and `ground_truth_seed`. Test parameters are a pinned set whose
    reference values are cached.
    """
    name = 'sir'
    dim_x = 1
    dim_theta = 1
    families = (KernelFamily.stein, KernelFamily.rbf)
    default_family = KernelFamily.stein

    def __init__(self, *, rate: float = 10.0, gamma: float = 0.05, population: float = 1e6,
                 initial_infected: float = 10, horizon_days: float = 150, dt: float = 0.1,
                 truth_draws: int = 5000, ground_truth_seed: int = 0, test_size: int = 100,
                 cache: Optional[TruthCache] = None):
        self.rate = rate
        self.gamma = gamma
        self.population = population
        self.initial_infected = initial_infected
        self.horizon_days = horizon_days
        self.dt = dt
        self.truth_draws = truth_draws
        self.ground_truth_seed = ground_truth_seed
        self.test_size = test_size
        self.cache = cache
        self.prior = Uniform([2.0], [9.0])
        self._table: Optional[Tuple[np.ndarray, np.ndarray]] = None

    def sample_theta(self, rng, count):
        return self.prior.sample(rng, count)

    def conditional_measure(self, theta) -> Gamma:
        return Gamma(float(np.asarray(theta).reshape(-1)[0]), self.rate)

    def integrand(self, X, theta, arm=0):
        return peak_infections(np.asarray(X).reshape(-1), self.gamma, self.population,
                               self.initial_infected, self.horizon_days, self.dt)

    def monte_carlo_truth(self, theta: float) -> float:
        rng = np.random.default_rng([self.ground_truth_seed, _theta_entropy(theta)])
        rates = self.conditional_measure(theta).sample(rng, self.truth_draws)
        return float(np.mean(self.integrand(rates, theta)))

    def cache_key(self) -> dict:
        return dict(problem=self.name, rate=self.rate, gamma=self.gamma, population=self.population,
                    initial_infected=self.initial_infected, horizon_days=self.horizon_days, dt=self.dt,
                    truth_draws=self.truth_draws, seed=self.ground_truth_seed, test_size=self.test_size)

    def pseudo_truth_table(self) -> Tuple[np.ndarray, np.ndarray]:
        """Pinned test parameters and their reference values, from the cache when present."""
        if self._table is not None:
            return self._table
        if self.cache is not None:
            table = self.cache.load(self.name, self.cache_key())
            if table is not None:
                self._table = table[:, :1], table[:, 1]
                return self._table
        rng = np.random.default_rng([self.ground_truth_seed, self.test_size])
        thetas = self.prior.sample(rng, self.test_size)
        logger.info(f'{self.name}: computing {self.test_size} pseudo ground truths '
                    f'of {self.truth_draws} draws each')
        truths = np.array([self.monte_carlo_truth(theta[0]) for theta in thetas])
        if self.cache is not None:
            self.cache.store(self.name, self.cache_key(), np.column_stack([thetas, truths]),
                             header=('theta', 'truth'))
        self._table = thetas, truths
        return self._table

    def prepare(self):
        self.pseudo_truth_table()

    def test_thetas(self, rng, count):
        thetas, _ = self.pseudo_truth_table()
        return thetas[:count]

    def ground_truth(self, thetas, arm=0):
        pinned, truths = self.pseudo_truth_table()
        values = []
        for theta in np.asarray(thetas, dtype=float).reshape(-1):
            match = np.flatnonzero(pinned[:, 0] == theta)
            values.append(truths[match[0]] if match.size else self.monte_carlo_truth(theta))
        return np.array(values)

    def quadrature_setup(self, theta, params: KernelParams) -> QuadratureSetup:
        """Stein kernels integrate against the Gamma directly. Other kernels integrate the
        reweighted peak against a Gaussian with the Gamma's mean and twice its spread."""
        measure = self.conditional_measure(theta)
        if params.family is KernelFamily.stein:
            score = score_of(measure)
            return QuadratureSetup(EmbeddingPair(params.build(score), measure), identity, shared=False, score=score)
        proposal = Gaussian(measure.mean, [[4 * measure.shape / measure.rate ** 2]])
        return QuadratureSetup(EmbeddingPair(params.build(), proposal), identity, shared=False,
                               proposal=(measure.density, proposal.density))

    def describe(self) -> str:
        return f'{self.name}(ξ={self.rate:g},dt={self.dt:g})'


def sir_problem(rate: float = 10.0, gamma: float = 0.05, population: float = 1e6, **options) -> SirProblem:
    return SirProblem(rate=rate, gamma=gamma, population=population, **options)
