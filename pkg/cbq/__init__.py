"""Conditional Bayesian quadrature: estimates of `I(θ) = E_{X~P_θ}[f(X, θ)]` with uncertainty.

```python
import numpy as np
from cbq import Gaussian, KernelFamily, KernelParams, EmbeddingPair, bq_fit, cbq_fit, cbq_predict

rng = np.random.default_rng(0)
thetas = rng.uniform(0, 1, size=(20, 1))
params = KernelParams(KernelFamily.rbf, lengthscale=1.0)

# Stage one: Bayesian quadrature of f(x) = x² under N(θ, 1) for every θ_t.
posteriors = []
for theta in thetas:
    measure = Gaussian(theta, np.eye(1))
    X = measure.sample(rng, 30)
    pair = EmbeddingPair(params.build(), measure)
    posteriors.append(bq_fit(pair.kernel, pair, X, X[:, 0] ** 2))

# Stage two: a heteroscedastic Gaussian process over θ.
model = cbq_fit(thetas, posteriors, KernelParams(KernelFamily.matern).build(), reg=0.1)
mean, variance = cbq_predict(model, np.array([0.5]))
```
The benchmarks of the `cbq` command are in `cbq.problems`, `cbq.methods` and `cbq.evaluation`.
"""
import logging

from .kernels import Kernel, KernelFamily, KernelParams, GaussianRbf, Matern32, LogGaussian, Stein, score_of
from .measures import Measure, Gaussian, Lognormal, Gamma, Uniform, sample_measure
from .embeddings import EmbeddingPair, kme, initial_error, numeric_kme_oracle
from .linalg import regularized_cholesky_solve
from .quadrature import bq_fit, cbq_fit, cbq_predict, cbq_predict_joint, BqPosterior, CbqModel
from .hyperopt import HyperGrid, grid_search_stage1, grid_search_stage2, stein_c_descent
from .problems import Problem, make_problem
from .methods import Method, MethodSettings, make_method
from .evaluation import Experiment, ResultRow, run_experiment
from .cache import TruthCache

logging.basicConfig()
logger = logging.getLogger('cbq')
logger.setLevel(logging.INFO)

__version__ = '0.1.0'
