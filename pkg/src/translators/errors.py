"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the domain where a formula is defined."""


class IntegrationError(RuntimeError):
    """The ODE integration failed; ``last_state`` holds the last accepted (s, r, V, alpha)."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class ConstructionError(RuntimeError):
    """A solution could not be assembled (e.g. no turning point before r_max)."""


class ReparametrizationError(ValueError):
    """A curve piece cannot be written as a graph over the radius."""


class RangeError(ValueError):
    """Requested radius range exceeds the computed extent of a profile."""


class FitError(ValueError):
    """Asymptotic fit could not be performed on the requested window."""


class HypothesisError(ValueError):
    """A sweep precondition on the obstacle does not hold."""
