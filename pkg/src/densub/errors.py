"""Exception hierarchy shared across the package."""


class DensubError(Exception):
    """Base class for all package errors."""


class InputError(DensubError):
    """Bad user input: malformed files, invalid specs, shape mismatches."""


class InfeasibleRuleError(InputError):
    """A gamma selection rule or certificate precondition cannot be satisfied."""


class BudgetExceededError(InputError):
    """An adversarial edit script violates one of the budget caps."""

    def __init__(self, cap_name, message):
        super().__init__(message)
        self.cap_name = cap_name


class NumericalFailureError(DensubError):
    """A numerical kernel produced non-finite values or failed to factorize."""


class TooLargeError(InputError):
    """A brute-force guard was exceeded."""
