"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: input/config problems exit 2,
numerical or construction failures exit 3, certificate violations exit 4.
"""


class UapproxError(Exception):
    """Base class for all package errors."""


class InputError(UapproxError, ValueError):
    """Arguments violate an operation's preconditions."""


class PreconditionError(InputError):
    """A mathematical hypothesis of a construction does not hold numerically."""


class RankDeficiencyError(InputError):
    """A linear system that should be determining is rank deficient."""


class HypothesisViolation(InputError):
    """A theorem hypothesis (for instance a nonzero kernel integral) fails."""


class ConstructionError(UapproxError, RuntimeError):
    """A constructive procedure could not produce its object."""


class NumericalError(UapproxError, ArithmeticError):
    """Quadrature or linear algebra broke down; carries an error estimate."""

    def __init__(self, message: str, estimate: float | None = None):
        super().__init__(message)
        self.estimate = estimate


class CertificateViolation(UapproxError, AssertionError):
    """A recorded error exceeded its proven bound."""

    def __init__(self, message: str, step: int | None = None,
                 error: float | None = None, bound: float | None = None):
        super().__init__(message)
        self.step = step
        self.error = error
        self.bound = bound
