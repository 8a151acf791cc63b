class CbqError(Exception):
    """Base class of all errors raised by the library."""


class InvalidKernel(CbqError):
    pass


class InvalidMeasure(CbqError):
    pass


class DimensionMismatch(CbqError):
    def __init__(self, expected: int, actual: int):
        super().__init__(f'Dimension mismatch: expected {expected}, got {actual}.')


class UnsupportedPair(CbqError):
    def __init__(self, kernel: object, measure: object):
        super().__init__(f'No closed-form embedding for {type(kernel).__name__} '
                         f'under {type(measure).__name__}.')


class EmbeddingMismatch(CbqError):
    def __init__(self):
        super().__init__('The kernel differs from the kernel of the embedding pair.')


class FactorizationFailed(CbqError):
    def __init__(self, jitter: float):
        super().__init__(f'Cholesky factorization failed at maximum jitter {jitter:.3g}.')


class NegativeVariance(CbqError):
    def __init__(self, value: float, scale: float):
        super().__init__(f'Posterior variance {value:.3g} is negative beyond tolerance '
                         f'(scale {scale:.3g}); the embedding is likely inconsistent with the kernel.')


class DegenerateTargets(CbqError):
    def __init__(self):
        super().__init__('degenerate targets: values are constant and cannot be standardized.')


class RankDeficient(CbqError):
    pass


class NotApplicable(CbqError):
    """A method cannot be applied to a problem."""


class CapExceeded(CbqError):
    def __init__(self, size: int, cap: int):
        super().__init__(f'Joint Gram matrix of size {size} exceeds the cap of {cap}.')


class ToleranceNotReached(CbqError):
    pass


class NonFiniteState(CbqError):
    pass


class OutOfDomain(CbqError):
    pass


class NonFiniteObjective(CbqError):
    pass


class InvalidCommand(Exception):
    """An invalid CLI command or configuration."""


class EmptyInput(CbqError):
    def __init__(self, what: str):
        super().__init__(f'{what} needs at least one value.')
