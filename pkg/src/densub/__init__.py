"""Densest m x n submatrix recovery via nuclear-norm relaxation and ADMM."""

__version__ = "0.1.0"

from .errors import (
    BudgetExceededError,
    DensubError,
    InfeasibleRuleError,
    InputError,
    NumericalFailureError,
    TooLargeError,
)

__all__ = [
    "DensubError",
    "InputError",
    "InfeasibleRuleError",
    "BudgetExceededError",
    "NumericalFailureError",
    "TooLargeError",
    "__version__",
]
