class ToolkitError(Exception):
    """Base exception for all toolkit errors."""


class InputError(ToolkitError, ValueError):
    """Invalid input: a violated precondition or a malformed document."""


class NumericalError(ToolkitError, ArithmeticError):
    """A numerical routine could not produce a trustworthy result."""


class InvalidStateError(InputError):
    """A state, schedule or policy violates its invariants."""


class NonPositiveRError(InputError):
    """A reproduction number was zero or negative."""


class InvalidHorizonError(InputError):
    """An integration horizon does not lie after the start time."""


class PreconditionViolation(InputError):  # noqa: N818
    """An operation was called outside its documented domain."""


class EmptyCurveError(InputError):
    """No point of the unit simplex attains the requested level."""


class ConfigParseError(InputError):
    """A scenario document is not well-formed."""


class LedgerError(InputError):
    """The run ledger database could not be opened, read or written."""


class ConfigValidationError(InputError):
    """A scenario document parsed but violates a field invariant."""

    def __init__(self, message: str, fields: list[str] | None = None) -> None:
        super().__init__(message)
        self.fields = fields or []


class DomainError(NumericalError):
    """Argument outside the domain of a real-valued function."""


class ConvergenceError(NumericalError):
    """An iteration stopped without meeting its residual tolerance."""


class StepFailureError(NumericalError):
    """The adaptive integrator could not meet its tolerance."""


class NoQssError(NumericalError):
    """Infected fraction never fell below the QSS threshold within the cap."""


class NoSolutionError(NumericalError):
    """No reproduction number in the admissible range solves the condition."""
