"""Exception types shared across the package.

The CLI maps each family onto an exit status: configuration problems exit
with 1, bad input data with 2 and numerical breakdowns with 3.
"""


class FarnbError(Exception):
    """Base class for all package errors."""


class ConfigError(FarnbError, ValueError):
    """Invalid run configuration or hyperparameter."""


class DataError(FarnbError, ValueError):
    """Unreadable, malformed or schema-incompatible data."""


class NumericError(FarnbError, ArithmeticError):
    """A loss or gradient became non-finite during training."""
