"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the domain where a quantity is defined."""


class UnsupportedError(NotImplementedError):
    """The requested method is not available for this configuration."""


class NumericalError(RuntimeError):
    """A root finder or integrator failed to converge."""
