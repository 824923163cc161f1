"""Exception types shared across the package."""


class SpecError(ValueError):
    """Invalid problem-class specification or run configuration."""


class SizeLimitError(RuntimeError):
    """Exhaustive operation requested above the configured size limit."""


class CostUnreachableError(ValueError):
    """Cost value with zero class probability, or outside the cost set."""


class EmptyCohortError(ValueError):
    """No bitstring attains the requested anchor cost in any instance."""


class NumericalError(RuntimeError):
    """A numerical result is undefined or non-finite."""
