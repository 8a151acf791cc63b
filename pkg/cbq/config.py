"""Run configuration for the `cbq` command line.

A configuration file holds one `key = value` pair per line; lists are comma separated
and `#` starts a comment:

```
# Linear problem grid
problem = linear
d = 2
n = 10, 50, 100
t = 10, 50, 100
methods = cbq, klsmc, lsmc, is
```
Command-line flags override values from the file (`--config run.cfg --seeds 5`).
`dump_config` writes the effective configuration back in the same format.
"""
from __future__ import annotations

__all__ = ['RunConfig', 'ConfigParser', 'parse_config', 'dump_config', 'read_config_file', 'config_parser',
           'add_config_arguments', 'config_from_namespace', 'build_problem', 'method_settings',
           'build_experiment']

from argparse import SUPPRESS, ArgumentParser, Namespace
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

from .cache import TruthCache
from .errors import InvalidCommand
from .evaluation import Experiment
from .kernels import KernelFamily
from .methods import METHODS, MethodSettings, make_method
from .problems import PROBLEMS, LinearIntegrand, Problem, make_problem

MAX_SEED = 2 ** 64
DEFAULT_LEVELS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95)


@dataclass(frozen=True)
class RunConfig:
    problem: str = 'linear'
    methods: Tuple[str, ...] = ('cbq',)
    n: Tuple[int, ...] = (10,)
    t: Tuple[int, ...] = (10,)
    d: int = 1
    seeds: int = 20
    master_seed: int = 0
    lambda_theta: Optional[float] = None
    kernel_x: Optional[str] = None
    kernel_theta: str = KernelFamily.matern.value
    integrand: str = LinearIntegrand.second_moment.value
    dt: float = 0.1
    gamma_rate: float = 10.0
    K1: float = 50.0
    K2: float = 150.0
    shock: float = 0.2
    test_size: int = 100
    ground_truth_seed: int = 0
    levels: Tuple[float, ...] = DEFAULT_LEVELS
    threads: Optional[int] = None
    output: Optional[str] = None
    summary: Optional[str] = None
    cache_dir: Optional[str] = None
    omit_time: bool = False

    def __post_init__(self):
        _check(self.problem in PROBLEMS, f'unknown problem "{self.problem}", expected one of: {", ".join(PROBLEMS)}')
        _check(len(self.methods) > 0, 'methods must not be empty')
        for method in self.methods:
            _check(method in METHODS, f'unknown method "{method}", expected one of: {", ".join(METHODS)}')
        for name in ('n', 't'):
            values = getattr(self, name)
            _check(len(values) > 0 and all(v > 0 for v in values), f'{name} must be a nonempty list of positive values')
        for name in ('d', 'seeds', 'test_size'):
            _check(getattr(self, name) > 0, f'{name} must be positive')
        _check(0 <= self.master_seed < MAX_SEED, 'master_seed must be an unsigned 64-bit value')
        _check(self.threads is None or self.threads > 0, 'threads must be positive')
        _check(self.lambda_theta is None or self.lambda_theta > 0, 'lambda_theta must be positive')
        _check(self.dt > 0, 'dt must be positive')
        _check(self.gamma_rate > 0, 'gamma_rate must be positive')
        _check(len(self.levels) > 0 and all(0 < level < 1 for level in self.levels), 'levels must lie in (0, 1)')
        families = [family.value for family in KernelFamily]
        _check(self.kernel_x is None or self.kernel_x in families,
               f'unknown kernel_x "{self.kernel_x}", expected one of: {", ".join(families)}')
        _check(self.kernel_theta in (KernelFamily.matern.value, KernelFamily.rbf.value),
               f'kernel_theta must be matern or rbf, got "{self.kernel_theta}"')
        integrands = [integrand.value for integrand in LinearIntegrand]
        _check(self.integrand in integrands, f'unknown integrand "{self.integrand}", '
                                             f'expected one of: {", ".join(integrands)}')


def _check(condition: bool, message: str):
    if not condition:
        raise InvalidCommand(message[0].upper() + message[1:] + '.')


def _boolean(value: str) -> bool:
    lowered = value.lower()
    if lowered in ('true', 'yes', '1'):
        return True
    if lowered in ('false', 'no', '0'):
        return False
    raise ValueError(value)


def _items(value: str) -> Tuple[str, ...]:
    return tuple(item.strip() for item in value.split(',') if item.strip())


def _listed(convert: Callable[[str], Any]) -> Callable[[str], Tuple[Any, ...]]:
    return lambda value: tuple(convert(item) for item in _items(value))


def _optional(convert: Callable[[str], Any]) -> Callable[[str], Any]:
    return lambda value: None if value.strip().lower() in ('auto', 'none', '') else convert(value.strip())


@dataclass(frozen=True)
class Key:
    """How one `RunConfig` field is read from text, written back and exposed as a flag."""
    parse: Callable[[str], Any]
    flag: str
    help: str
    null: str = 'none'


KEYS: Dict[str, Key] = {
    'problem': Key(str.strip, '--problem', f'benchmark problem: {", ".join(PROBLEMS)}'),
    'methods': Key(_items, '--methods', f'comma-separated methods: {", ".join(METHODS)}'),
    'n': Key(_listed(int), '--n', 'comma-separated sample counts N per parameter'),
    't': Key(_listed(int), '--t', 'comma-separated parameter counts T'),
    'd': Key(int, '--d', 'dimension of the linear problem'),
    'seeds': Key(int, '--seeds', 'independent repetitions per cell'),
    'master_seed': Key(int, '--master-seed', 'unsigned 64-bit seed all random streams derive from'),
    'lambda_theta': Key(_optional(float), '--lambda-theta', 'second-stage regularizer, or "auto"', 'auto'),
    'kernel_x': Key(_optional(str), '--kernel-x', 'first-stage kernel family, or "auto"', 'auto'),
    'kernel_theta': Key(str.strip, '--kernel-theta', 'second-stage kernel family: matern or rbf'),
    'integrand': Key(str.strip, '--integrand', 'linear problem integrand: second_moment or predictive_mean'),
    'dt': Key(float, '--dt', 'SIR integration step in days'),
    'gamma_rate': Key(float, '--gamma-rate', 'rate of the Gamma distribution of the SIR infection rate'),
    'K1': Key(float, '--K1', 'lower strike of the butterfly option'),
    'K2': Key(float, '--K2', 'upper strike of the butterfly option'),
    'shock': Key(float, '--shock', 'relative price shock of the finance problem'),
    'test_size': Key(int, '--test-size', 'number of test parameters θ*'),
    'ground_truth_seed': Key(int, '--ground-truth-seed', 'seed of problem data and pseudo ground truths'),
    'levels': Key(_listed(float), '--levels', 'comma-separated credible levels to calibrate'),
    'threads': Key(_optional(int), '--threads', 'maximum number of worker threads'),
    'output': Key(_optional(str), '--output', 'CSV output path, standard output by default'),
    'summary': Key(_optional(str), '--summary', 'path of a Markdown summary of the run'),
    'cache_dir': Key(_optional(str), '--cache-dir', 'directory of cached pseudo ground truths'),
    'omit_time': Key(_boolean, '--omit-time', 'leave the time_ms column empty'),
}


def _convert(key: str, value: str) -> Any:
    try:
        return KEYS[key].parse(value)
    except ValueError:
        raise InvalidCommand(f'Invalid value "{value}" for "{key}".') from None


def read_config_file(path: Path) -> Dict[str, Any]:
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise InvalidCommand(f'Cannot read config file "{path}": {e.strerror}.') from e
    values = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise InvalidCommand(f'{path}:{number}: expected "key = value", got "{line}".')
        key, value = (part.strip() for part in line.split('=', 1))
        if key not in KEYS:
            raise InvalidCommand(f'{path}:{number}: unknown key "{key}".')
        values[key] = _convert(key, value)
    return values


def dump_config(config: RunConfig) -> str:
    lines = []
    for field in fields(config):
        value = getattr(config, field.name)
        if value is None:
            text = KEYS[field.name].null
        elif isinstance(value, tuple):
            text = ', '.join(repr(v) if isinstance(v, float) else str(v) for v in value)
        elif isinstance(value, bool):
            text = str(value).lower()
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f'{field.name} = {text}')
    return '\n'.join(lines) + '\n'


class ConfigParser(ArgumentParser):
    """Reports bad arguments as `InvalidCommand` instead of exiting."""

    def error(self, message):
        raise InvalidCommand(message)


def add_config_arguments(parser: ArgumentParser):
    parser.add_argument('--config', type=Path, default=SUPPRESS, help='a "key = value" configuration file')
    for key, spec in KEYS.items():
        if key == 'omit_time':
            parser.add_argument(spec.flag, dest=key, action='store_const', const='true', default=SUPPRESS,
                                help=spec.help)
        else:
            parser.add_argument(spec.flag, dest=key, type=str, default=SUPPRESS, help=spec.help)


def config_parser() -> ArgumentParser:
    parser = ConfigParser(description='Conditional Bayesian quadrature run configuration.')
    add_config_arguments(parser)
    return parser


def config_from_namespace(args: Namespace) -> RunConfig:
    values = read_config_file(args.config) if hasattr(args, 'config') else {}
    values.update({key: _convert(key, value) for key, value in vars(args).items() if key in KEYS})
    return RunConfig(**values)


def parse_config(argv: Sequence[str]) -> RunConfig:
    """The configuration from an optional `--config` file overridden by flags."""
    return config_from_namespace(config_parser().parse_args(list(argv)))


def build_problem(config: RunConfig) -> Problem:
    options: Dict[str, Any]
    if config.problem == 'linear':
        options = dict(d=config.d, integrand=LinearIntegrand(config.integrand), seed=config.ground_truth_seed)
    elif config.problem == 'sir':
        options = dict(rate=config.gamma_rate, dt=config.dt, ground_truth_seed=config.ground_truth_seed,
                       test_size=config.test_size, cache=TruthCache(config.cache_dir))
    elif config.problem == 'finance':
        options = dict(K1=config.K1, K2=config.K2, shock=config.shock)
    else:
        options = dict(ground_truth_seed=config.ground_truth_seed, cache=TruthCache(config.cache_dir))
    return make_problem(config.problem, **options)


def method_settings(config: RunConfig) -> MethodSettings:
    return MethodSettings(
        kernel_x=KernelFamily(config.kernel_x) if config.kernel_x else None,
        kernel_theta=KernelFamily(config.kernel_theta),
        lambda_theta=config.lambda_theta,
    )


def build_experiment(config: RunConfig, problem: Optional[Problem] = None) -> Experiment:
    settings = method_settings(config)
    return Experiment(
        problem=problem or build_problem(config),
        methods=[make_method(name, settings) for name in config.methods],
        ns=config.n,
        ts=config.t,
        seeds=config.seeds,
        master_seed=config.master_seed,
        test_size=config.test_size,
        threads=config.threads,
    )
