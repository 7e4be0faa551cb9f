"""Exception types raised by the estimation routines."""


class EstimationError(ArithmeticError):
    """Base class for numerical failures during estimation."""


class IllConditionedError(EstimationError):
    """A linear system or eigenvalue pencil is too ill-conditioned to solve."""


class RankDeficiencyError(EstimationError):
    """A matrix has lower numerical rank than the requested model order."""


class SingularInformationError(EstimationError):
    """The Fisher information matrix cannot be inverted."""


class UnsupportedInputError(ValueError):
    """The input is valid in general but not supported by this estimator."""
