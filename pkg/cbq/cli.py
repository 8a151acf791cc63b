#!/usr/bin/env python
"""
Conditional Bayesian quadrature benchmark CLI.

Access CLI help via:
```bash
cbq --help
```
or
```
python -m cbq --help
```

Sweep the linear problem over budgets and seeds, writing one CSV row per cell:
```bash
cbq run --problem linear --d 2 --n 10,50,100 --t 10,50,100 --seeds 20 --methods cbq,klsmc,lsmc,is
```
Check the calibration of the credible intervals:
```bash
cbq calibrate --problem linear --n 10 --t 10
```
Estimate the convergence rate of one method in N:
```bash
cbq converge --problem linear --methods cbq --n 10,30,100,300 --t 50
```
Build the cached pseudo ground truth of a problem:
```bash
cbq ground-truth --problem sir
```
All subcommands accept `--config FILE` with `key = value` lines; flags override the file.

Exit codes: 0 on success, 1 on an invalid command or configuration, 2 if some cells failed.
"""
import sys
from argparse import ArgumentParser
from contextlib import contextmanager
from logging import getLogger, DEBUG, INFO, ERROR, WARNING
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, TextIO

from .config import (ConfigParser, RunConfig, add_config_arguments, build_experiment, build_problem,
                     config_from_namespace, dump_config)
from .errors import CbqError, InvalidCommand
from .evaluation import CSV_HEADER, ResultRow, calibrate, converge, medians, run_experiment, write_csv
from .problems import HealthProblem, SirProblem
from .templates import render_summary

logger = getLogger('cbq')

SUCCESS, INVALID, PARTIAL = 0, 1, 2


@contextmanager
def output_stream(location: Optional[str]) -> Iterator[TextIO]:
    if not location or location == '-':
        yield sys.stdout
        return
    path = Path(location)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='') as stream:
        yield stream


def exit_code(rows: Sequence[ResultRow]) -> int:
    failed = sum(row.failed for row in rows)
    if failed:
        logger.warning(f'{failed} of {len(rows)} cells failed')
        return PARTIAL
    return SUCCESS


def write_summary(config: RunConfig, rows: Sequence[ResultRow]):
    if not config.summary:
        return
    failed = sum(row.failed for row in rows)
    text = render_summary(medians(rows), dump_config(config), title=f'{config.problem} benchmark',
                          failed=failed, total=len(rows))
    with output_stream(config.summary) as stream:
        stream.write(text)
    logger.info(f'Summary: {config.summary}')


def run(config: RunConfig) -> int:
    rows = run_experiment(build_experiment(config))
    with output_stream(config.output) as stream:
        write_csv(stream, CSV_HEADER, (row.csv_values(config.omit_time) for row in rows))
    write_summary(config, rows)
    return exit_code(rows)


def run_calibration(config: RunConfig) -> int:
    coverage, rows = calibrate(build_experiment(config), config.levels)
    with output_stream(config.output) as stream:
        write_csv(stream, ('level', 'coverage'),
                  ([repr(level), repr(float(value))] for level, value in zip(config.levels, coverage)))
    write_summary(config, rows)
    return exit_code(rows)


def run_convergence(config: RunConfig) -> int:
    if len(config.methods) != 1:
        raise InvalidCommand(f'converge runs exactly one method, got {", ".join(config.methods)}.')
    if len(config.n) > 1 and len(config.t) > 1:
        raise InvalidCommand('converge varies either --n or --t, not both.')
    points, slope, rows = converge(build_experiment(config))
    with output_stream(config.output) as stream:
        write_csv(stream, ('budget', 'median_rmse', 'slope'),
                  ([str(budget), repr(value), repr(slope)] for budget, value in points))
    logger.info(f'{config.methods[0]}: convergence slope {slope:.3f}')
    write_summary(config, rows)
    return exit_code(rows)


def build_ground_truth(config: RunConfig) -> int:
    problem = build_problem(config)
    if isinstance(problem, SirProblem):
        thetas, _ = problem.pseudo_truth_table()
        logger.info(f'{problem.describe()}: {len(thetas)} pseudo ground truths ready')
    elif isinstance(problem, HealthProblem):
        reference = problem.evppi_reference()
        logger.info(f'{problem.describe()}: EVPPI reference {reference:.6g}')
    else:
        raise InvalidCommand(f'Problem "{config.problem}" has an exact ground truth, nothing to build.')
    return SUCCESS


def argument_parser() -> ArgumentParser:
    parser = ConfigParser(prog='cbq', description='Conditional Bayesian quadrature benchmarks.')
    subparsers = parser.add_subparsers()

    add_command(subparsers, 'run', run, 'Sweep methods over budgets and seeds, one CSV row per cell')
    add_command(subparsers, 'calibrate', run_calibration, 'Coverage of credible intervals per level')
    add_command(subparsers, 'converge', run_convergence, 'Median RMSE per budget and its log-log slope')
    add_command(subparsers, 'ground-truth', build_ground_truth, 'Build cached pseudo ground truths')
    add_version_cli(subparsers)

    return parser


def add_command(subparsers, name, func, description):
    command_parser = subparsers.add_parser(name=name, description=description)
    add_config_arguments(command_parser)
    add_log_arguments(command_parser)
    command_parser.set_defaults(func=lambda args: func(config_from_namespace(args)))


def add_log_arguments(parser):
    parser.add_argument('--log', default='info', type=str,
                        help='Set log level, options: debug, info, warning, error')


def set_log_level(args):
    if hasattr(args, 'log') and args.log:
        logger.setLevel(parse_log_level(args.log))


def parse_log_level(value: str):
    levels = {
        'debug': DEBUG,
        'info': INFO,
        'warning': WARNING,
        'error': ERROR,
    }
    name = value.lower()
    if name not in levels:
        raise InvalidCommand(f'Unrecognized log level "{name}", expecting one of {list(levels.keys())}')
    return levels[name]


def add_version_cli(subparsers):
    version_parser = subparsers.add_parser(name='version')
    version_parser.set_defaults(func=print_version)


def print_version(args) -> int:
    print(cbq_version())
    return SUCCESS


def cbq_version():
    from . import __version__
    return __version__


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = argument_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return INVALID
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, 'func'):
            parser.print_usage(sys.stderr)
            return INVALID
        set_log_level(args)
        return args.func(args)
    except (InvalidCommand, CbqError) as error:
        logger.error(f'{type(error).__name__}: {str(error)}')
        return INVALID


if __name__ == '__main__':
    sys.exit(main())
