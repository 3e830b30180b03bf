"""Shared exception types."""


class CapacityError(ValueError):
    """Requested register or instance size exceeds the simulator cap."""


class ConfigError(Exception):
    """Invalid configuration (bad flags, malformed slot maps, missing files)."""


class DivergenceError(ArithmeticError):
    """A numerical quantity became non-finite during optimization."""
