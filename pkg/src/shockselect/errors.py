"""Exception hierarchy.

Each class carries the process exit code the command-line front end uses
when the error escapes a command.
"""

from __future__ import annotations


class ShockSelectError(Exception):
    exit_code = 1


class ConfigError(ShockSelectError):
    """Bad configuration key, value or file."""

    exit_code = 1


class DomainError(ShockSelectError, ValueError):
    """Argument outside the evaluation domain (densities live in [0, 1])."""

    exit_code = 2


class InadmissibleModelError(ShockSelectError, ValueError):
    """Model does not have the positive-negative-positive shape required."""

    exit_code = 2


class PositivityError(ShockSelectError, ValueError):
    """Regularisation weight (or its derivative) is not positive where needed."""

    exit_code = 2


class SolverError(ShockSelectError, RuntimeError):
    """A root find, bracket search or shooting step could not complete."""

    exit_code = 3


class BracketError(SolverError):
    def __init__(self, message: str, samples=None):
        super().__init__(message)
        # (parameter, residual) pairs scanned before giving up
        self.samples = list(samples or [])


class PoleError(SolverError, ValueError):
    """Quantity evaluated where a diffusivity zero makes it singular."""


class ShootingEscapeError(SolverError):
    def __init__(self, message: str, escape_point=None):
        super().__init__(message)
        self.escape_point = escape_point


class InstabilityError(ShockSelectError, RuntimeError):
    """Simulation produced non-finite values or the step size collapsed."""

    exit_code = 4

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time
