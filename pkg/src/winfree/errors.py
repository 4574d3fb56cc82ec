"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid or inconsistent configuration input."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class PreconditionError(ValueError):
    """A stated hypothesis of a criterion or verification does not hold."""


class UnsupportedOperationError(TypeError):
    """Operation not defined for the given interaction family."""


class SizeLimitError(ValueError):
    """Problem size exceeds the enumeration limits of the method."""


class DegenerateFrequenciesError(ValueError):
    """All intrinsic frequencies vanish; caller must use the bipolar path."""


class CriterionInapplicableError(ValueError):
    """The hypotheses of a criterion exclude the given interaction."""


class InsufficientDataError(ValueError):
    """Not enough samples in a trajectory window for the requested estimate."""


class IntegrationFailure(RuntimeError):
    """Step-size underflow or non-finite state; carries the partial trajectory."""

    def __init__(self, message, partial_trajectory=None):
        super().__init__(message)
        self.partial_trajectory = partial_trajectory
