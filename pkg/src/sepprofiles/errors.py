"""Exception and warning types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented invariant (non-stochastic kernel, bad law, ...)."""


class SizeError(ValueError):
    """Requested instance exceeds a configured size cap."""


class ParameterError(ValueError):
    """Parameters fall outside the range where a formula is defined."""


class NumericError(ArithmeticError):
    """A numerical procedure could not reach the requested accuracy."""


class UnreliableResultWarning(RuntimeWarning):
    """A floating-point result is badly conditioned and should not be trusted."""
