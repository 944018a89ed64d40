"""Exception types shared across the package."""

__all__ = [
    "LayoutError",
    "GateSynthesisError",
    "IntegrationError",
    "ConfigError",
]


class LayoutError(ValueError):
    """Raised when tensor-factor layouts are malformed or incompatible."""


class GateSynthesisError(ValueError):
    """Raised when gate parameters cannot satisfy the loop conditions."""


class IntegrationError(RuntimeError):
    """Raised when the master-equation integrator detects a numeric failure."""


class ConfigError(ValueError):
    """Raised for malformed run configurations."""
