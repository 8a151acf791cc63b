from typing import Dict, Optional, Type

from .method_abc import Method, MethodSettings, Estimates, ThetaScaler, pooled_standardize, validation_split
from .conditional import ConditionalBq
from .monte_carlo import MonteCarlo, ImportanceSampling
from .regression import LeastSquaresMc, KernelLsmc
from .multi_output import MultiOutputBq

METHODS: Dict[str, Type[Method]] = {
    method.name: method
    for method in (ConditionalBq, MonteCarlo, ImportanceSampling, LeastSquaresMc, KernelLsmc, MultiOutputBq)
}


def make_method(name: str, settings: Optional[MethodSettings] = None) -> Method:
    try:
        return METHODS[name](settings)
    except KeyError:
        raise ValueError(f'Unknown method "{name}", expected one of: {", ".join(METHODS)}.') from None
