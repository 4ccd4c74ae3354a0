"""
Typed errors shared by every cavtool package.

Each error class carries the process exit code the CLI uses when the error
escapes a command, so library code never has to know about exit statuses.
"""


class CavToolError(Exception):
    """Base class for all cavtool errors."""

    exit_code = 1


class InvalidArgumentError(CavToolError, ValueError):
    """An argument violates an operation's precondition."""

    exit_code = 2


class ConfigError(CavToolError):
    """A config file is missing, unparseable, or lacks required fields."""

    exit_code = 2

    def __init__(self, message: str, missing: list[str] | None = None):
        self.missing = list(missing or [])
        if self.missing:
            message = f"{message}: missing {', '.join(self.missing)}"
        super().__init__(message)


class InvalidProfileError(CavToolError):
    """A field profile cannot be normalized (e.g. it is identically zero)."""

    exit_code = 2


class NonConvergenceError(CavToolError):
    """A numerical procedure did not converge."""

    exit_code = 3


class StabilityError(CavToolError):
    """Cavity geometry does not support a Gaussian mode."""

    exit_code = 4


class DesignInfeasibleError(CavToolError):
    """A mirror design target cannot be reached."""

    exit_code = 4


class RootNotFoundError(CavToolError):
    """No resonance inside the search bracket."""

    exit_code = 4


class DegenerateRatesError(CavToolError):
    """The two g2 timescales coincide, so the bunching amplitude is undefined."""

    exit_code = 4
