"""Exception hierarchy shared across the package.

Validation errors (bad inputs, unknown names, infeasible parameter
combinations) map to CLI exit code 1; numerical failures (quadrature
budget exhausted, root bracketing failures, table accuracy misses)
map to exit code 2.
"""

from __future__ import annotations

import numpy as np


class ShrinkError(Exception):
    """Base class for all package errors."""


class ValidationError(ShrinkError, ValueError):
    """Inputs violate a documented precondition."""


class UnknownFamilyError(ValidationError):
    """Requested prior family is not registered."""


class ConfigError(ValidationError):
    """Configuration file or CLI flags are unusable."""


class NumericalError(ShrinkError, RuntimeError):
    """A numerical routine failed to reach its accuracy contract."""


class QuadratureError(NumericalError):
    """Adaptive quadrature did not converge within its panel budget.

    Carries the partial integrals and error estimates so callers can
    report diagnostics instead of a bare failure.
    """

    def __init__(self, message: str, partial=None, error_estimate=None):
        super().__init__(message)
        self.partial = None if partial is None else np.asarray(partial)
        self.error_estimate = (
            None if error_estimate is None else np.asarray(error_estimate)
        )


class ThresholdError(NumericalError):
    """Decision-threshold solve failed (no bracket, or the shrinkage
    profile is not monotone so closed-form error rates would be invalid)."""


class TableError(NumericalError):
    """A fast-path interpolation table missed its accuracy target."""
