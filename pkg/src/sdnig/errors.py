"""Exception hierarchy; the CLI maps each class to an exit code."""


class SdnigError(Exception):
    exit_code = 1


class ValidationError(SdnigError, ValueError):
    """Invalid parameters or inputs. Carries the list of violated invariants."""

    exit_code = 2

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations or [])


class DomainError(SdnigError, ValueError):
    """Numerical-domain failure: argument outside a chf strip, missing exponential moment."""

    exit_code = 3


class ClosureError(DomainError):
    """Closure rule applied to laws that do not satisfy its precondition."""


class ConvergenceError(SdnigError, RuntimeError):
    exit_code = 4

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class IngestionError(ValidationError):
    """Malformed or misaligned market data / input files."""
