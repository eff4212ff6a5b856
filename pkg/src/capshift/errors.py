"""Exception hierarchy shared by every module.

The three classes map onto the CLI exit codes: bad input or configuration
(1), a mathematical hypothesis of the asymptotic law not holding for the
requested data (2), and a solver failing to reach its tolerance (3).
"""


class CapshiftError(Exception):
    """Base class for all package errors."""


class ValidationError(CapshiftError, ValueError):
    """Malformed input: bad geometry, bad ladder, bad config."""


class HypothesisViolation(CapshiftError, RuntimeError):
    """The data violates a hypothesis of the asymptotic statement.

    Examples: the targeted eigenvalue is not simple, or the local
    expansion angle sits in the excluded tangent position.
    """


class NumericalFailure(CapshiftError, RuntimeError):
    """A solver did not converge to the requested tolerance."""
