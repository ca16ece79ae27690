"""Exception types shared across the package."""


class ViscofixError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ViscofixError, ValueError):
    """A value handed to an operation is outside its contract.

    Examples: dimension mismatch between a point and a space, evaluating a
    schedule below its start index, a non-finite coordinate.
    """


class ConfigurationError(ViscofixError, ValueError):
    """A problem, map, or run was assembled from inconsistent pieces.

    Examples: an averaging weight outside its admissible interval, a step
    size violating the monotonicity bound, an unknown config key.
    """


class InnerSolveError(ViscofixError, RuntimeError):
    """The implicit inner solve exceeded its certified iteration budget.

    Under the documented preconditions (nonexpansive map, contraction
    factor < 1) this is unreachable; seeing it signals that the supplied
    map is not actually nonexpansive.
    """


class NotConvergedError(ViscofixError, RuntimeError):
    """A diagnostic was requested for a run that did not converge."""
