"""
Exception hierarchy for Selberg Lab.

Validation problems derive from ValueError and numerical failures from
ArithmeticError, so callers that only know the builtin types still catch
them. The command-line layer maps each family to an exit status.
"""

from typing import Optional


class SelbergLabError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SelbergLabError, ValueError):
    """Input violates a precondition."""


class DomainError(ValidationError):
    """Argument outside the mathematical domain of the operation."""


class RangeError(ValidationError):
    """Argument outside the range where the result is meaningful."""


class SchemaError(ValidationError):
    """Malformed group file or configuration value."""


class NotHyperbolicError(ValidationError):
    """Operation requires a hyperbolic element."""


class ParameterMismatchError(ValidationError):
    """Parameters do not fit the requested evaluation."""


class ExperimentalFeatureError(ValidationError):
    """An experimental code path was requested without opting in."""


class RelatorViolationError(ValidationError):
    """A relator word does not evaluate to the identity."""

    def __init__(self, index: int, residual: float, label: Optional[str] = None):
        self.index = index
        self.residual = residual
        where = f" in '{label}'" if label else ""
        super().__init__(
            f"relator {index}{where} does not evaluate to +/-Id "
            f"(residual {residual:.3e})"
        )


class NumericalError(SelbergLabError, ArithmeticError):
    """A numerical procedure failed or cannot be trusted."""


class QuadratureError(NumericalError):
    """Adaptive quadrature did not converge."""


class UnstabilizedSpectrumError(NumericalError):
    """Length spectrum changed at the last enumeration depth."""


class EmptySpectrumError(NumericalError):
    """Length spectrum has no entries below its cutoff."""


class TailDivergenceError(NumericalError):
    """Truncation tail bound does not converge."""


class SearchFailureError(NumericalError):
    """A threshold search left its admissible interval."""


class ConsistencyError(NumericalError):
    """Two independent evaluation routes disagree."""


class ConstructionError(NumericalError):
    """A geometric construction produced non-real data."""


class PrecisionLossError(NumericalError):
    """Word products overflowed or lost their significant digits."""


class WordBudgetExceeded(NumericalError):
    """Word enumeration would exceed the configured budget."""

    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            f"word enumeration needs {required} words, budget is {budget} "
            "(raise SELBERG_LAB_BUDGET or lower max_depth)"
        )


EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the command-line exit status."""
    if isinstance(exc, ValidationError):
        return EXIT_VALIDATION
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    if isinstance(exc, OSError):
        return EXIT_IO
    raise exc
