"""Exception hierarchy shared by all modules.

Each class carries the CLI exit code it maps to, so the front end can
translate failures without inspecting messages.
"""

from __future__ import annotations


class ScatterError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(ScatterError, ValueError):
    """Invalid parameters or configuration (violated invariants)."""

    exit_code = 2


class DomainError(ConfigError):
    """Argument outside the mathematical domain of a function."""


class RangeError(ConfigError):
    """Argument outside the tabulated range of a coordinate map."""


class UnsupportedError(ConfigError):
    """Request that is not defined in the given regime."""


class PreconditionError(ConfigError):
    """Input violates a documented precondition."""


class DataIOError(ScatterError, OSError):
    """Missing or unreadable data files."""

    exit_code = 3


class NumericalQualityError(ScatterError, ArithmeticError):
    """A computed quantity fails a numerical quality gate."""

    exit_code = 4


class CoverageError(NumericalQualityError):
    """A tabulated energy window does not cover the required range."""


class InconsistentDataError(NumericalQualityError):
    """Input data are not consistent with the assumed model."""


class DegenerateError(InconsistentDataError):
    """A linear system built from the data is singular."""


class ConvergenceError(ScatterError, ArithmeticError):
    """An iterative solver failed to converge."""

    exit_code = 5
