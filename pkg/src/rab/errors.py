"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function being evaluated."""


class BracketError(RuntimeError):
    """Root bracketing failed; ``bracket`` holds the last interval tried."""

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class QuadratureError(RuntimeError):
    """Adaptive quadrature ran out of subdivisions before meeting tolerance."""

    def __init__(self, message, estimate=None, achieved=None):
        super().__init__(message)
        self.estimate = estimate
        self.achieved = achieved


class NonMonotoneWarning(RuntimeWarning):
    """Sampling found a function that was assumed monotone to be non-monotone."""
