"""Vanka-type multigrid for complex-shifted Laplacian systems ``(A + lam I) z = b``."""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    DegenerateLFAError,
    EigenSolverError,
    GridMismatchError,
    ShiftIncompatibleError,
    SingularOperatorError,
    VankaError,
)
from .grid import Grid2D, GridFunction, Shift, Stencil3x3
from .lfa import LFAConfig, optimize_omega, smoothing_factor, two_grid_factor
from .multigrid import MultigridConfig, SolveReport, build_hierarchy, solve
from .paradiag import TimeDiscretization, diagonalize_time, paradiag_solve
from .smoothers import SmootherConfig, vanka_coeffs, vanka_stencil

__all__ = [
    "ConfigurationError",
    "DegenerateLFAError",
    "EigenSolverError",
    "GridMismatchError",
    "ShiftIncompatibleError",
    "SingularOperatorError",
    "VankaError",
    "Grid2D",
    "GridFunction",
    "Shift",
    "Stencil3x3",
    "LFAConfig",
    "optimize_omega",
    "smoothing_factor",
    "two_grid_factor",
    "MultigridConfig",
    "SolveReport",
    "build_hierarchy",
    "solve",
    "TimeDiscretization",
    "diagonalize_time",
    "paradiag_solve",
    "SmootherConfig",
    "vanka_coeffs",
    "vanka_stencil",
]
