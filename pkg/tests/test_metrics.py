import numpy as np
import pytest

from cbq.errors import DimensionMismatch, EmptyInput
from cbq.metrics import calibration_coverage, convergence_slope, rmse


def test_rmse():
    assert rmse([3.0, 4.0], [0.0, 0.0]) == 3.5355339059327378
    assert rmse([1.0, 2.0], [1.0, 2.0]) == 0.0
    with pytest.raises(DimensionMismatch):
        rmse([1.0], [1.0, 2.0])
    with pytest.raises(EmptyInput):
        rmse([], [])


def test_calibration_coverage():
    coverage = calibration_coverage([0.0] * 3, [1.0] * 3, [0.5, 1.5, 3.0], [0.5, 0.9, 0.99])
    assert np.allclose(coverage, [1 / 3, 2 / 3, 2 / 3])


def test_calibration_is_nondecreasing_in_level():
    rng = np.random.default_rng(0)
    truths = rng.standard_normal(200)
    coverage = calibration_coverage(np.zeros(200), np.ones(200), truths, np.linspace(0.05, 0.95, 19))
    assert np.all(np.diff(coverage) >= 0)
    assert coverage[-1] == pytest.approx(0.95, abs=0.05)


def test_calibration_checks():
    with pytest.raises(ValueError):
        calibration_coverage([0.0], [-1.0], [0.0], [0.5])
    with pytest.raises(ValueError):
        calibration_coverage([0.0], [1.0], [0.0], [1.0])


def test_convergence_slope():
    budgets = np.array([10, 30, 100, 300, 1000])
    assert convergence_slope(budgets, 2.0 * budgets ** -0.5) == pytest.approx(-0.5)
    with pytest.raises(ValueError):
        convergence_slope([10, 100], [1.0, 0.1])
    with pytest.raises(ValueError):
        convergence_slope([10, 100, 1000], [1.0, 0.0, 0.1])
