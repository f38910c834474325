"""Exception hierarchy shared by the library and the CLI."""


class ArborError(Exception):
    """Base class for all arbor-rcm errors."""


class InvalidInputError(ArborError, ValueError):
    """Input outside the domain of an operation."""


class GuardExceededError(ArborError):
    """A size guard (edges, nodes, depth) would be exceeded."""


class ConvergenceError(ArborError, RuntimeError):
    """A bracketed solver found no sign change or ran out of iterations."""


class NonMonotoneEventError(InvalidInputError):
    """An event passed as increasing failed the monotonicity spot-check."""
