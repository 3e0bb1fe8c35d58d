"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A parameter is non-finite or outside its allowed range."""


class DomainError(ValueError):
    """Input lies outside the domain where an operation is defined."""


class CapacityError(ValueError):
    """Requested size exceeds what can be materialized."""


class NumericError(ArithmeticError):
    """Overflow or other loss of floating-point meaning."""


class SingularConfigurationError(NumericError):
    """A logarithm of zero was requested (degenerate matrix product)."""


class NormalizationError(NumericError):
    """A matrix cannot be normalized to unit determinant."""


class ClassError(ValueError):
    """A matrix does not belong to the conjugacy class an operation needs."""


class DegenerateInputError(ValueError):
    """Input is defective or triangular where a generic matrix is required."""


class NoRootError(DomainError):
    """No parameter set reproduces the requested point."""
