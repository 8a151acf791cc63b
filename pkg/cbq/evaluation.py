"""Benchmark sweeps over budgets, seeds and methods.

Every cell `(method, N, T, seed)` draws its own dataset, fits, and predicts at the
test parameters. Random streams are derived from the master seed and the cell alone:

- dataset: `SeedSequence([master_seed, seed, N, T])`, shared by all methods of the cell;
- test parameters: `SeedSequence([master_seed, seed, TEST_STREAM])`;
- method: `SeedSequence([master_seed, seed, N, T, crc32(method name)])`.

Cells run in a thread pool and are collected by index, so the rows do not depend on the
number of threads.
"""
from __future__ import annotations

__all__ = ['CSV_HEADER', 'ResultRow', 'Experiment', 'Median', 'run_experiment', 'run_cell', 'medians',
           'calibrate', 'converge', 'write_csv', 'rmse', 'calibration_coverage', 'convergence_slope']

import csv
from concurrent.futures.thread import ThreadPoolExecutor
from dataclasses import dataclass, field
from logging import getLogger
from time import perf_counter
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Tuple
from zlib import crc32

import numpy as np

from .errors import CbqError
from .linalg import count_jitter
from .methods import Estimates, Method
from .metrics import calibration_coverage, convergence_slope, rmse
from .problems import Problem

logger = getLogger('cbq')

CSV_HEADER = ('problem', 'method', 'd', 'N', 'T', 'seed', 'rmse', 'time_ms', 'hypers', 'jitter_events', 'error')
TEST_STREAM = 0x7E57
CELL_ERRORS = (CbqError, ValueError, ArithmeticError, np.linalg.LinAlgError)


@dataclass(frozen=True)
class ResultRow:
    problem: str
    method: str
    d: int
    N: int
    T: int
    seed: int
    rmse: float
    time_ms: float
    hypers: str
    jitter_events: int
    error: str = ''

    @property
    def failed(self) -> bool:
        return bool(self.error)

    def csv_values(self, omit_time: bool = False) -> List[str]:
        return [self.problem, self.method, str(self.d), str(self.N), str(self.T), str(self.seed),
                repr(self.rmse), '' if omit_time else f'{self.time_ms:.3f}', self.hypers,
                str(self.jitter_events), self.error]


@dataclass(frozen=True)
class Experiment:
    """A sweep of one problem over methods, sample sizes `N`, parameter counts `T` and seeds."""
    problem: Problem
    methods: Sequence[Method]
    ns: Sequence[int]
    ts: Sequence[int]
    seeds: int = 20
    master_seed: int = 0
    test_size: int = 100
    threads: Optional[int] = None

    def cells(self) -> List[Tuple[Method, int, int, int]]:
        return [(method, N, T, seed)
                for method in self.methods for N in self.ns for T in self.ts for seed in range(self.seeds)]

    def dataset_rng(self, seed: int, N: int, T: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.master_seed, seed, N, T]))

    def test_rng(self, seed: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.master_seed, seed, TEST_STREAM]))

    def method_rng(self, method: Method, seed: int, N: int, T: int) -> np.random.Generator:
        key = crc32(method.name.encode('utf-8'))
        return np.random.default_rng(np.random.SeedSequence([self.master_seed, seed, N, T, key]))

    def info(self, text: str):
        logger.info(f'{self.problem.describe()} {text}')


@dataclass(frozen=True)
class CellOutcome:
    row: ResultRow
    estimates: Optional[Estimates] = field(default=None, repr=False)
    truths: Optional[np.ndarray] = field(default=None, repr=False)


def _run_cell(experiment: Experiment, method: Method, N: int, T: int, seed: int) -> CellOutcome:
    problem = experiment.problem

    def row(rmse: float, time_ms: float, hypers: str, jitter_events: int, error: str = '') -> ResultRow:
        return ResultRow(problem.name, method.name, problem.dim_x, N, T, seed, rmse, time_ms, hypers,
                         jitter_events, error)

    estimates = None
    with count_jitter() as events:
        try:
            data = problem.sample(experiment.dataset_rng(seed, N, T), N, T)
            thetas_star = problem.test_thetas(experiment.test_rng(seed), experiment.test_size)
            start = perf_counter()
            estimates = method.estimate(problem, data, thetas_star, experiment.method_rng(method, seed, N, T))
            elapsed = (perf_counter() - start) * 1000
            error = problem.error(thetas_star, estimates.means)
            truths = problem.ground_truth(thetas_star)
        except CELL_ERRORS as e:
            message = f'{type(e).__name__}: {e}'
            logger.warning(f'{problem.name} {method.name} N={N} T={T} seed={seed} failed: {message}')
            return CellOutcome(row(float('nan'), 0.0, '', events.count, message))
    result = row(error, max(elapsed, 1e-6), estimates.hypers, events.count)
    logger.debug(f'{problem.name} {method.name} N={N} T={T} seed={seed}: rmse {error:.6g}')
    return CellOutcome(result, estimates, truths)


def run_cell(experiment: Experiment, method: Method, N: int, T: int, seed: int) -> ResultRow:
    """A single cell of the sweep; failures are recorded in the row's `error`."""
    return _run_cell(experiment, method, N, T, seed).row


def _outcomes(experiment: Experiment) -> List[CellOutcome]:
    for method in experiment.methods:
        method.check(experiment.problem)
    experiment.problem.prepare()
    cells = experiment.cells()
    experiment.info(f'STARTED {len(cells)} cells on {experiment.threads or "default"} threads')
    with ThreadPoolExecutor(max_workers=experiment.threads) as executor:
        outcomes = list(executor.map(lambda cell: _run_cell(experiment, *cell), cells))
    failures = sum(outcome.row.failed for outcome in outcomes)
    experiment.info(f'COMPLETED {len(cells)} cells, {failures} failed')
    return outcomes


def run_experiment(experiment: Experiment) -> List[ResultRow]:
    """One row per cell, in the order method, N, T, seed.

    Raises `NotApplicable` before running anything if a method cannot handle the problem.
    """
    return [outcome.row for outcome in _outcomes(experiment)]


@dataclass(frozen=True)
class Median:
    problem: str
    method: str
    N: int
    T: int
    rmse: float
    runs: int
    skipped: int


def medians(rows: Iterable[ResultRow]) -> List[Median]:
    """Median RMSE per `(problem, method, N, T)`, skipping failed cells and counting them."""
    groups: Dict[Tuple[str, str, int, int], List[ResultRow]] = {}
    for row in rows:
        groups.setdefault((row.problem, row.method, row.N, row.T), []).append(row)
    result = []
    for (problem, method, N, T), group in groups.items():
        values = [row.rmse for row in group if not row.failed]
        median = float(np.median(values)) if values else float('nan')
        result.append(Median(problem, method, N, T, median, len(values), len(group) - len(values)))
    return result


def calibrate(experiment: Experiment, levels: Sequence[float]) -> Tuple[np.ndarray, List[ResultRow]]:
    """Coverage of central credible intervals, pooled over every successful cell and θ*.

    Only methods that report posterior variances contribute; the first arm is used.
    """
    outcomes = _outcomes(experiment)
    means, stds, truths = [], [], []
    for outcome in outcomes:
        if outcome.estimates is None or outcome.estimates.variances is None:
            continue
        means.append(outcome.estimates.means[0])
        stds.append(np.sqrt(outcome.estimates.variances[0]))
        truths.append(outcome.truths)
    if not means:
        raise CbqError('No successful cell reported posterior variances to calibrate.')
    coverage = calibration_coverage(np.concatenate(means), np.concatenate(stds), np.concatenate(truths), levels)
    return coverage, [outcome.row for outcome in outcomes]


def converge(experiment: Experiment) -> Tuple[List[Tuple[int, float]], float, List[ResultRow]]:
    """Median RMSE per budget and the log-log slope, sweeping whichever of N and T varies."""
    if len(experiment.methods) != 1:
        raise ValueError('A convergence sweep runs exactly one method.')
    if len(experiment.ns) > 1 and len(experiment.ts) > 1:
        raise ValueError('A convergence sweep varies either N or T, not both.')
    rows = run_experiment(experiment)
    by_n = len(experiment.ns) > 1 or len(experiment.ts) == 1
    points = [(m.N if by_n else m.T, m.rmse) for m in medians(rows)]
    usable = [(budget, value) for budget, value in points if np.isfinite(value) and value > 0]
    slope = convergence_slope(*zip(*usable)) if len(usable) >= 3 else float('nan')
    return points, slope, rows


def write_csv(stream: TextIO, header: Sequence[str], rows: Iterable[Sequence[str]]):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(header)
    writer.writerows(rows)
