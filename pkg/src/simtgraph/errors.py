"""Exception types shared across the package."""


class SimtGraphError(Exception):
    """Base class for all package-specific errors."""


class ParseError(SimtGraphError, ValueError):
    """Malformed input file. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RangeError(SimtGraphError, IndexError):
    """A vertex or edge index is outside its valid range."""


class ConfigError(SimtGraphError, ValueError):
    """Invalid configuration (launch geometry, probabilities, app params)."""


class SimulationError(SimtGraphError, RuntimeError):
    """A simulated thread body failed. Carries the offending ThreadCoord."""

    def __init__(self, message, coord=None):
        self.coord = coord
        if coord is not None:
            message = f"{message} (thread {coord})"
        super().__init__(message)


class ConvergenceError(SimtGraphError, RuntimeError):
    """An application failed to converge within the round budget.

    ``metrics_log`` holds the per-round metrics collected before the abort,
    so the failing run can still be inspected.
    """

    def __init__(self, message, metrics_log=None):
        self.metrics_log = metrics_log or []
        super().__init__(message)
