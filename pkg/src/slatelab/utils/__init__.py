from .error_handling import (
    ConfigError,
    DegenerateSlateError,
    DimensionMismatchError,
    EnumerationBudgetError,
    InfeasibleSlateError,
    InvalidDistributionError,
    NumericalError,
    SlateLabError,
    TerminatedUserError,
    handle_cli_errors,
    handle_numeric_errors,
    setup_logging,
)

__all__ = [
    'ConfigError',
    'DegenerateSlateError',
    'DimensionMismatchError',
    'EnumerationBudgetError',
    'InfeasibleSlateError',
    'InvalidDistributionError',
    'NumericalError',
    'SlateLabError',
    'TerminatedUserError',
    'handle_cli_errors',
    'handle_numeric_errors',
    'setup_logging',
]
