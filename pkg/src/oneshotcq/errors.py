"""Exception hierarchy shared by all modules."""


class OneShotError(Exception):
    """Base class for all package errors."""


class DimensionError(OneShotError, ValueError):
    """Operand shapes are incompatible."""


class ValidationError(OneShotError, ValueError):
    """An operator or distribution violates its type invariants."""


class CapExceededError(OneShotError, ValueError):
    """A composite dimension or enumeration exceeds its configured cap."""


class NumericalError(OneShotError, ArithmeticError):
    """The eigensolver or a root search failed to converge."""


class CertificationError(OneShotError, ArithmeticError):
    """Primal and dual values disagree by more than the allowed gap.

    Both values are kept on the exception for diagnostics.
    """

    def __init__(self, message, primal=None, dual=None, gap=None):
        super().__init__(message)
        self.primal = primal
        self.dual = dual
        self.gap = gap
