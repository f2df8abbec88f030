class DomainError(ValueError):
    """A value fell outside a function's domain."""


class DimensionError(ValueError):
    """Matrix shapes are incompatible."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap."""


class HypothesisError(ValueError):
    """A theorem's hypothesis is violated in a way that leaves a formula undefined."""
