"""Exception hierarchy for sympkit."""


class SympkitError(Exception):
    """Base class for all sympkit errors."""


class DimensionError(SympkitError, ValueError):
    """Matrix or sequence shapes are inconsistent."""


class StructureError(SympkitError, ValueError):
    """Coefficients do not have the structure an operation requires."""


class HorizonError(SympkitError, IndexError):
    """An index lies outside the finite horizon [0, N]."""


class SingularCoefficientError(SympkitError, ValueError):
    """A coefficient that must be invertible (e.g. p_{k+1}) is zero."""


class PreconditionError(SympkitError, ValueError):
    """Inputs violate a documented precondition."""


class DomainError(SympkitError, ValueError):
    """The spectral parameter is outside the operation's domain."""


class BoundaryConditionError(SympkitError, ArithmeticError):
    """A boundary condition produced a singular normalisation matrix."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class PropagationError(SympkitError, ArithmeticError):
    """Propagation produced non-finite values."""

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class NumericalWarning(UserWarning):
    """A numerical decision is unreliable (rank drop, failed cross-check, ...)."""
