"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid parameters, grids or input files."""


class InvariantViolation(RuntimeError):
    """A physical invariant (normalization, unitarity, de-excitation) failed."""


class IntegrationError(InvariantViolation):
    """The coherence integration did not satisfy its runtime checks."""
