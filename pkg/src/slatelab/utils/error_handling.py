import functools
import logging
import sys
from typing import Any, Callable, Optional, TypeVar

import numpy as np

# Define generic type variable
T = TypeVar('T')


class SlateLabError(Exception):
    """
    Base exception for every failure raised by slatelab
    """

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.context = context


class ConfigError(SlateLabError):
    """
    Configuration file could not be parsed or validated
    """

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message, key=key)
        self.key = key


class InvalidDistributionError(SlateLabError):
    """
    Choice scores or probabilities do not define a distribution
    """
    pass


class InfeasibleSlateError(SlateLabError):
    """
    Fewer items are available than the slate size requires
    """

    def __init__(self, needed: int, available: int):
        super().__init__(
            f"Slate of size {needed} requested from {available} items",
            needed=needed, available=available,
        )
        self.needed = needed
        self.available = available


class DegenerateSlateError(SlateLabError):
    """
    Slate value is undefined (zero total choice score)
    """
    pass


class TerminatedUserError(SlateLabError):
    """
    Dynamics applied to a user whose session already ended
    """
    pass


class EnumerationBudgetError(SlateLabError):
    """
    Exhaustive slate enumeration would exceed its budget
    """

    def __init__(self, count: int, budget: int):
        super().__init__(
            f"Enumerating {count} slates exceeds the budget of {budget}",
            count=count, budget=budget,
        )
        self.count = count
        self.budget = budget


class DimensionMismatchError(SlateLabError):
    """
    Network input width does not match the layer dimensions
    """

    def __init__(self, expected: int, got: int):
        super().__init__(
            f"Expected input of width {expected}, got {got}",
            expected=expected, got=got,
        )
        self.expected = expected
        self.got = got


class NumericalError(SlateLabError):
    """
    Non-finite value encountered during training
    """
    pass


def handle_numeric_errors(func: Callable[..., T]) -> Callable[..., T]:
    """
    Run the decorated function with numpy floating point errors raised,
    converting them to NumericalError

    Args:
        func: Decorated function
    """
    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> T:
        try:
            with np.errstate(over='raise', invalid='raise', divide='raise'):
                return func(*args, **kwargs)
        except FloatingPointError as e:
            logging.getLogger(__name__).error(
                "Numerical failure in %s: %s", func.__name__, str(e)
            )
            raise NumericalError(f"Numerical failure in {func.__name__}: {str(e)}") from e

    return wrapper


def handle_cli_errors(func: Callable[..., int]) -> Callable[..., int]:
    """
    CLI subcommand error handling decorator

    Known failures are logged and reported on stderr with exit code 1.

    Args:
        func: Decorated subcommand returning an exit code
    """
    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> int:
        logger = logging.getLogger(__name__)

        try:
            return func(*args, **kwargs)
        except ConfigError as e:
            where = f" (key: {e.key})" if e.key else ""
            logger.error("Configuration error%s: %s", where, str(e))
            print(f"error: configuration{where}: {e}", file=sys.stderr)
            return 1
        except SlateLabError as e:
            logger.error("%s: %s", type(e).__name__, str(e))
            print(f"error: {e}", file=sys.stderr)
            return 1
        except FileNotFoundError as e:
            logger.error("File not found: %s", str(e))
            print(f"error: file not found: {e.filename or e}", file=sys.stderr)
            return 1

    return wrapper


def setup_logging(log_file: Optional[str] = None, log_level: int = logging.INFO) -> None:
    """
    Setup logging configuration

    Args:
        log_file: Optional log file path
        log_level: Log level
    """
    # Create formatter
    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    # Configure root logger, replacing handlers from an earlier call
    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)
    for handler in [h for h in root_logger.handlers if getattr(h, "_slatelab", False)]:
        root_logger.removeHandler(handler)
        handler.close()

    # Create file handler
    if log_file:
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(log_level)
        file_handler.setFormatter(formatter)
        file_handler._slatelab = True
        root_logger.addHandler(file_handler)

    # Console handler goes to stderr so stdout stays machine readable
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(formatter)
    console_handler._slatelab = True
    root_logger.addHandler(console_handler)
