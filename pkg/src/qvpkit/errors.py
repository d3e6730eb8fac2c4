"""Exception types shared across the toolkit.

The command-line layer maps each class to a stable exit code, so library code
raises the most specific class that applies.
"""


class QVPError(Exception):
    """Base class for all toolkit errors."""


class InvalidInput(QVPError, ValueError):
    """Malformed or out-of-contract input (exit code 2)."""


class SizeCapExceeded(QVPError):
    """A dense construction would exceed the configured qubit cap (exit code 3)."""


class Infeasible(QVPError):
    """Requested parameters cannot be met within the configured budget (exit code 3)."""


class CrossCheckFailure(QVPError):
    """Two independent computations that must agree did not (exit code 4)."""
