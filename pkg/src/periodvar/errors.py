"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes, so library code should raise the most
specific class that applies.
"""


class PeriodvarError(Exception):
    """Base class for all errors raised by this package."""


class ArgumentError(PeriodvarError, ValueError):
    """Invalid argument values or inconsistent input data."""


class DomainError(PeriodvarError, ValueError):
    """Input outside the mathematical domain of an operation."""


class ConditioningError(PeriodvarError):
    """Input too ill-conditioned to compute with (e.g. near-coincident branch points)."""


class PrecisionError(PeriodvarError):
    """A quadrature or series did not reach the requested precision."""


class PathError(PeriodvarError):
    """An integration path could not be routed away from singular points."""


class TruncationError(PeriodvarError):
    """A truncated sum would need more terms than the configured cap."""


class NonConvergenceError(PeriodvarError):
    """A limit or extrapolation sequence failed its convergence diagnostic."""


class FamilyError(PeriodvarError):
    """A one-parameter family violates the assumptions of a degeneration fit."""


class DegenerateSampleError(PeriodvarError):
    """Random sampling kept producing degenerate configurations past the retry cap."""
