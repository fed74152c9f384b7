"""Exception types shared across the package."""


class SwapError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(SwapError, ValueError):
    """A numeric input is outside its documented range.

    Carries the offending field name so callers can report it.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class UnreachableNodeError(SwapError, ValueError):
    """Interference makes the swap success probability zero."""


class PlanStructureError(SwapError, ValueError):
    """A segment, layer, or plan violates a structural invariant."""


class OracleBoundError(SwapError, RuntimeError):
    """The exhaustive planner refused an instance above its size bound."""


class ConfigError(SwapError, ValueError):
    """A config file or CLI argument could not be interpreted."""
