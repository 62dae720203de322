"""Separation distance, cutoff limit profiles and spectral comparison bounds for
card shuffles, coordinate-refresh walks and the Bernoulli-Laplace urn."""

from .errors import NumericError, ParameterError, SizeError, UnreliableResultWarning, ValidationError

__all__ = ["NumericError", "ParameterError", "SizeError", "UnreliableResultWarning", "ValidationError"]
__version__ = "0.1.0"
