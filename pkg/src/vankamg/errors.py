"""Exception types raised by the solver and analysis routines."""


class VankaError(Exception):
    """Base class for all package errors."""


class ConfigurationError(VankaError, ValueError):
    """Invalid grid size, hierarchy or option combination."""


class GridMismatchError(VankaError, ValueError):
    """Two grid functions live on different grids."""


class ShiftIncompatibleError(VankaError, ValueError):
    """The shift makes a local Vanka patch (or the Jacobi diagonal) singular."""


class SingularOperatorError(VankaError, ArithmeticError):
    """A direct solve hit a (numerically) singular matrix."""


class DegenerateLFAError(VankaError, ValueError):
    """Every sampled frequency was skipped in a two-grid analysis."""


class EigenSolverError(VankaError, ArithmeticError):
    """The dense eigensolver failed to converge."""
