"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Bad user input: wrong shapes, out-of-range values, malformed files."""


class DegenerateInputError(ValidationError):
    """Input is numerically degenerate (e.g. a rank-deficient matrix)."""


class IncompatibleLatticeError(ValidationError):
    """A distribution was built on a different lattice than the one supplied."""


class DegenerateDistributionError(ValidationError):
    """A distribution cannot be normalized because its total mass is zero."""


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss."""
