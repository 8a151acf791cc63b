from typing import Callable, Dict

from .problem_abc import Problem, Dataset, QuadratureSetup, gaussian_setup, identity
from .linear import LinearProblem, LinearIntegrand, linear_bayes_problem, linear_posterior
from .sir import SirProblem, SirTrajectory, sir_problem, sir_solve, sir_peak, peak_infections
from .finance import FinanceProblem, finance_problem, butterfly_payoff, finance_integrand, call_price
from .health import HealthProblem, health_problem, condition_gaussian, evppi, evppi_estimate
from ..measures import sample_measure

PROBLEMS: Dict[str, Callable[..., Problem]] = {
    'linear': linear_bayes_problem,
    'sir': sir_problem,
    'finance': finance_problem,
    'health': health_problem,
}


def make_problem(name: str, **options) -> Problem:
    """Build a benchmark problem by its identifier."""
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise ValueError(f'Unknown problem "{name}", expected one of: {", ".join(PROBLEMS)}.') from None
    return factory(**options)
