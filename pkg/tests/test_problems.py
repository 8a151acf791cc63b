import numpy as np
import pytest

from cbq.cache import TruthCache
from cbq.embeddings import numeric_expectation
from cbq.errors import DimensionMismatch, NotApplicable, OutOfDomain
from cbq.kernels import KernelFamily, KernelParams
from cbq.measures import Gaussian, Lognormal
from cbq.problems import FinanceProblem, HealthProblem, LinearIntegrand, SirProblem, butterfly_payoff, \
    call_price, condition_gaussian, evppi, evppi_estimate, finance_integrand, linear_bayes_problem, \
    linear_posterior, make_problem, peak_infections, sir_peak, sir_solve


def test_registry():
    assert make_problem('linear', d=2).dim_x == 2
    assert isinstance(make_problem('finance'), FinanceProblem)
    with pytest.raises(ValueError):
        make_problem('weather')


def test_linear_posterior():
    design = np.array([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]])
    responses = np.array([1.0, -1.0, 0.5])
    theta = np.array([2.0, 1.5])
    mean, covariance = linear_posterior(theta, design, responses, eta=0.5)
    precision = np.diag(1 / theta) + 0.5 * design.T @ design
    assert np.allclose(covariance, np.linalg.inv(precision))
    assert np.allclose(mean, 0.5 * np.linalg.solve(precision, design.T @ responses))
    with pytest.raises(OutOfDomain):
        linear_posterior([0.0, 1.0], design, responses, 0.5)
    with pytest.raises(DimensionMismatch):
        linear_posterior([1.0], design, responses, 0.5)


@pytest.mark.parametrize('integrand', list(LinearIntegrand))
def test_linear_truth_matches_monte_carlo(integrand):
    problem = linear_bayes_problem(2, integrand=integrand, seed=3)
    theta = np.array([1.5, 2.5])
    estimate = numeric_expectation(lambda X: problem.integrand(X, theta), problem.conditional_measure(theta),
                                   monte_carlo=True, draws=200_000, rng=np.random.default_rng(1))
    assert abs(problem.ground_truth([theta])[0] - estimate.value) <= 4 * estimate.error


def test_linear_dataset_shapes():
    problem = linear_bayes_problem(3)
    data = problem.sample(np.random.default_rng(0), N=5, T=4)
    assert data.thetas.shape == (4, 3)
    assert data.samples.shape == (4, 5, 3)
    assert data.values.shape == (1, 4, 5)
    assert data.size == (5, 4)
    assert np.all((data.thetas >= 1) & (data.thetas <= 3))


def test_linear_data_is_seeded():
    first, second = linear_bayes_problem(2, seed=5), linear_bayes_problem(2, seed=5)
    assert np.array_equal(first.design, second.design)
    assert not np.array_equal(first.design, linear_bayes_problem(2, seed=6).design)


def test_linear_setups():
    problem = linear_bayes_problem(2)
    theta = np.array([2.0, 2.0])
    rbf = problem.quadrature_setup(theta, KernelParams(KernelFamily.rbf))
    matern = problem.quadrature_setup(theta, KernelParams(KernelFamily.matern))
    stein = problem.quadrature_setup(theta, KernelParams(KernelFamily.stein))
    assert rbf.shared and not matern.shared and not stein.shared
    assert stein.score is not None
    X = problem.conditional_measure(theta).sample(np.random.default_rng(0), 50000)
    whitened = matern.to_space(X)
    assert np.allclose(whitened.mean(axis=0), 0, atol=0.03)
    assert np.allclose(np.cov(whitened.T), np.eye(2), atol=0.03)


def test_sir_conserves_population():
    trajectory = sir_solve([0.2, 0.5], horizon_days=50)
    total = trajectory.susceptible + trajectory.infected + trajectory.recovered
    assert np.allclose(total, 1e6, rtol=1e-10)
    assert trajectory.times[-1] == pytest.approx(50)


def test_sir_without_infections_peaks_at_start():
    assert peak_infections([0.0])[0] == pytest.approx(10)


def test_sir_peak_is_chunked_exactly():
    rates = np.linspace(0.1, 0.9, 7)
    assert np.array_equal(peak_infections(rates, chunk=2), sir_peak(sir_solve(rates)))


def test_sir_step_refinement():
    rates = np.array([0.2, 0.5])
    assert np.allclose(peak_infections(rates, dt=0.1), peak_infections(rates, dt=0.05), rtol=1e-3)


def test_sir_input_checks():
    with pytest.raises(OutOfDomain):
        peak_infections([-0.1])
    with pytest.raises(OutOfDomain):
        peak_infections([0.2], dt=0.0)
    with pytest.raises(OutOfDomain):
        peak_infections([0.2], initial_infected=0)


def test_sir_pseudo_truths_are_cached(tmp_path, caplog):
    caplog.set_level('INFO', logger='cbq')
    options = dict(truth_draws=20, test_size=3, cache=TruthCache(tmp_path))
    thetas, truths = SirProblem(**options).pseudo_truth_table()
    assert thetas.shape == (3, 1)
    assert np.all((thetas >= 2) & (thetas <= 9))
    assert 'cache miss' in caplog.text

    caplog.clear()
    cached = SirProblem(**options)
    cached_thetas, cached_truths = cached.pseudo_truth_table()
    assert 'cache hit' in caplog.text
    assert np.array_equal(cached_thetas, thetas)
    assert np.array_equal(cached_truths, truths)
    assert np.array_equal(cached.ground_truth(thetas), truths)
    assert np.array_equal(cached.test_thetas(np.random.default_rng(0), 2), thetas[:2])


def test_sir_truth_is_pinned_by_seed():
    problem = SirProblem(truth_draws=10)
    assert problem.monte_carlo_truth(4.0) == problem.monte_carlo_truth(4.0)
    assert problem.monte_carlo_truth(4.0) != SirProblem(truth_draws=10, ground_truth_seed=1).monte_carlo_truth(4.0)


def test_sir_setups():
    problem = SirProblem()
    stein = problem.quadrature_setup([4.0], KernelParams(KernelFamily.stein))
    assert stein.proposal is None and stein.score is not None
    values = np.array([1.0, 2.0, 3.0])
    assert np.array_equal(stein.integrand_values(np.array([[0.3], [0.4], [0.5]]), values), values)

    rbf = problem.quadrature_setup([4.0], KernelParams(KernelFamily.rbf))
    proposal = rbf.pair.measure
    assert isinstance(proposal, Gaussian)
    assert proposal.location == pytest.approx([0.4])
    assert proposal.covariance[0, 0] == pytest.approx(4 * 4.0 / 100)
    X = np.array([[0.2], [0.4], [0.9]])
    expected = values * problem.conditional_measure([4.0]).density(X) / proposal.density(X)
    assert np.allclose(rbf.integrand_values(X, values), expected)

    draws = proposal.sample(np.random.default_rng(3), 100_000)
    weights = rbf.integrand_values(draws, np.ones(len(draws)))
    assert weights.mean() == pytest.approx(1.0, abs=0.02)


def test_butterfly_payoff():
    assert np.array_equal(butterfly_payoff([100.0, 50.0, 200.0, 0.0]), [50.0, 0.0, 0.0, 0.0])
    assert finance_integrand(100.0) == pytest.approx(50.0 - 30.0)


@pytest.mark.parametrize('strike', [50.0, 100.0, 150.0])
def test_call_price_matches_quadrature(strike):
    measure = Lognormal(np.log(100.0) - 0.045, 0.09)
    expected = numeric_expectation(lambda X: np.maximum(X[:, 0] - strike, 0), measure, tol=1e-6,
                                   breakpoints=[strike])
    assert call_price(measure.log_mean, measure.log_var, strike) == pytest.approx(expected.value, abs=1e-5)


def test_finance_truth_matches_quadrature():
    problem = FinanceProblem()
    theta = 110.0
    strikes = [50.0, 100.0, 150.0]
    kinks = strikes + [k / 1.2 for k in strikes]
    expected = numeric_expectation(lambda X: problem.integrand(X, theta), problem.conditional_measure(theta),
                                   tol=1e-6, breakpoints=kinks)
    assert problem.ground_truth([theta])[0] == pytest.approx(expected.value, abs=1e-5)


def test_finance_checks_and_setups():
    with pytest.raises(OutOfDomain):
        FinanceProblem(K1=150.0, K2=50.0)
    problem = FinanceProblem()
    with pytest.raises(OutOfDomain):
        problem.conditional_measure(-1.0)
    assert problem.quadrature_setup(100.0, KernelParams(KernelFamily.log_gaussian)).shared
    assert not problem.quadrature_setup(100.0, KernelParams(KernelFamily.stein)).shared
    assert problem.expected_loss(np.random.default_rng(0), draws=1000) >= 0


def test_condition_gaussian():
    mean, covariance = condition_gaussian([0.0, 0.0], [[1.0, 0.5], [0.5, 1.0]], (1,), [1.0])
    assert np.allclose(mean, [0.5])
    assert np.allclose(covariance, [[0.75]])


def test_evppi():
    assert evppi([[1.0, 3.0], [2.0, 2.0]]) == pytest.approx(0.5)
    with pytest.raises(NotApplicable):
        evppi([[1.0, 2.0]])
    with pytest.raises(NotApplicable):
        evppi_estimate(linear_bayes_problem(1), lambda thetas: np.zeros((1, len(thetas))), [[1.0]])


@pytest.mark.parametrize('arm', [0, 1])
def test_health_truth_matches_monte_carlo(arm):
    problem = HealthProblem()
    theta = np.array([0.65, 0.85])
    estimate = numeric_expectation(lambda X: problem.integrand(X, theta, arm), problem.conditional_measure(theta),
                                   monte_carlo=True, draws=200_000, rng=np.random.default_rng(2))
    assert abs(problem.ground_truth([theta], arm)[0] - estimate.value) <= 4 * estimate.error


def test_health_error_is_against_the_reference():
    problem = HealthProblem(reference_draws=5000)
    thetas = problem.sample_theta(np.random.default_rng(0), 20)
    truths = np.stack([problem.ground_truth(thetas, arm) for arm in range(2)])
    assert evppi_estimate(problem, lambda t: np.stack([problem.ground_truth(t, arm) for arm in range(2)]),
                          thetas) == pytest.approx(evppi(truths))
    assert problem.error(thetas, truths) == pytest.approx(abs(evppi(truths) - problem.evppi_reference()))


def test_health_reference_is_cached(tmp_path):
    reference = HealthProblem(reference_draws=1000, cache=TruthCache(tmp_path)).evppi_reference()
    assert reference >= 0
    assert len(list(tmp_path.iterdir())) == 1
    assert HealthProblem(reference_draws=1000, cache=TruthCache(tmp_path)).evppi_reference() == reference
    assert HealthProblem(reference_draws=1000, identical_arms=True).evppi_reference() == pytest.approx(0.0)


def test_health_setups():
    problem = HealthProblem()
    theta = problem.prior.location
    assert not problem.quadrature_setup(theta, KernelParams(KernelFamily.matern)).shared
    rbf = problem.quadrature_setup(theta, KernelParams(KernelFamily.rbf))
    assert rbf.shared
    assert isinstance(rbf.pair.measure, Gaussian)
    assert rbf.to_space(problem.conditional_measure(theta).location[None, :]) == pytest.approx(
        rbf.pair.measure.location[None, :])
