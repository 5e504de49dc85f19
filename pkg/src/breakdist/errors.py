"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage errors exit 1, data errors 2,
numerical failures 3.
"""


class BreakdistError(Exception):
    """Base class for all package errors."""


class UsageError(BreakdistError):
    """Bad command-line arguments or configuration."""


class DataError(BreakdistError):
    """Invalid or inconsistent input data."""


class NumericalError(BreakdistError):
    """A numerical routine failed or produced an untrustworthy result."""
