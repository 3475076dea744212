"""Geometric multigrid for ``(A + lam I) z = b`` on the unit square.

Every level re-discretizes the shifted operator with its own step ``h``;
the shift ``lam`` is shared, so ``eta = lam h^2`` grows by 4 per coarsening.
The coarsest level is solved by dense LU.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .errors import ConfigurationError, ShiftIncompatibleError, SingularOperatorError
from .grid import (
    Grid2D,
    GridFunction,
    Shift,
    apply_laplacian_array,
    prolong_array,
    restrict_array,
    shifted_laplacian_matrix,
)
from .smoothers import Smoother, SmootherConfig

__all__ = [
    "MultigridConfig",
    "SolveReport",
    "Level",
    "Hierarchy",
    "build_hierarchy",
    "cycle",
    "coarse_direct_solve",
    "solve",
    "convergence_rate",
]

PIVOT_TOL = 1e-14
RCOND_TOL = 1e-13


@dataclass(frozen=True)
class MultigridConfig:
    """Cycle shape and stopping rule.  Defaults are the W(1,0) Vanka setup."""

    cycle: str = "W"
    nu1: int = 1
    nu2: int = 0
    h0: float = 1 / 8
    tol: float = 1e-8
    max_iter: int = 200
    smoother: SmootherConfig = field(default_factory=SmootherConfig.vanka)

    def __post_init__(self):
        cyc = self.cycle.upper()
        if cyc not in ("V", "W"):
            raise ConfigurationError(f"cycle must be V or W, got {self.cycle!r}")
        object.__setattr__(self, "cycle", cyc)
        if self.nu1 < 0 or self.nu2 < 0 or self.nu1 + self.nu2 < 1:
            raise ConfigurationError("need nu1, nu2 >= 0 and nu1 + nu2 >= 1")
        if not self.tol > 0:
            raise ConfigurationError("tol must be positive")
        if self.max_iter < 0:
            raise ConfigurationError("max_iter must be non-negative")
        if not self.h0 > 0:
            raise ConfigurationError("h0 must be positive")

    @property
    def gamma(self) -> int:
        return 1 if self.cycle == "V" else 2

    @property
    def coarsest_N(self) -> int:
        n0 = round(1.0 / self.h0)
        if abs(n0 * self.h0 - 1.0) > 1e-12 or n0 < 2:
            raise ConfigurationError(f"h0 must be 1/N0 with integer N0 >= 2, got {self.h0}")
        return n0


@dataclass
class SolveReport:
    iterations: int
    residual_history: list[float]
    converged: bool
    rate: float
    wall_time: float
    solution: GridFunction | None = field(default=None, repr=False)


@dataclass
class Level:
    grid: Grid2D
    lam: complex
    smoother: Smoother | None = None
    lu: tuple | None = field(default=None, repr=False)

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def eta(self) -> complex:
        return self.lam * self.grid.h**2


@dataclass
class Hierarchy:
    """Levels ordered fine to coarse; the last one carries the LU factors."""

    levels: list[Level]
    config: MultigridConfig

    def __len__(self) -> int:
        return len(self.levels)


def _factor(grid: Grid2D, lam: complex):
    mat = shifted_laplacian_matrix(grid, lam).toarray()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(mat, check_finite=False)
    small_pivot = np.abs(np.diag(lu)).min() < PIVOT_TOL * np.abs(mat).max()
    # pivots alone miss some exactly singular shifts; add a condition estimate
    rcond, _ = lapack.zgecon(lu, np.abs(mat).sum(axis=0).max(), norm="1")
    if small_pivot or not rcond > RCOND_TOL:
        raise SingularOperatorError(
            f"singular coarse operator on N={grid.N} for lambda={lam}"
        )
    return lu, piv


def coarse_direct_solve(b: GridFunction, shift: Shift) -> GridFunction:
    """Dense LU solve of ``(A + lam I) u = b``; raises ``SingularOperatorError``."""
    lu = _factor(b.grid, shift.lam)
    return GridFunction(b.grid, sla.lu_solve(lu, b.ravel(), check_finite=False))


def build_hierarchy(grid: Grid2D, shift: Shift, cfg: MultigridConfig) -> Hierarchy:
    n0 = cfg.coarsest_N
    ratio = grid.N // n0
    if grid.N % n0 or ratio & (ratio - 1):
        raise ConfigurationError(
            f"N={grid.N} is not a power-of-two multiple of the coarsest N0={n0}"
        )
    levels = []
    g = grid
    while True:
        level = Level(g, shift.lam)
        if g.N == n0:
            level.lu = _factor(g, shift.lam)
            levels.append(level)
            break
        try:
            level.smoother = Smoother(g.h, shift.lam, cfg.smoother)
        except ShiftIncompatibleError as exc:
            raise ShiftIncompatibleError(f"level N={g.N}: {exc}") from exc
        levels.append(level)
        g = g.coarsen()
    return Hierarchy(levels, cfg)


def _cycle(hier: Hierarchy, k: int, u: np.ndarray, b: np.ndarray) -> np.ndarray:
    level = hier.levels[k]
    if level.lu is not None:
        return sla.lu_solve(level.lu, b.ravel(), check_finite=False).reshape(b.shape)
    cfg = hier.config
    for _ in range(cfg.nu1):
        u = level.smoother.sweep(u, b)
    r = b - apply_laplacian_array(u, level.h, level.lam)
    rc = restrict_array(r)
    ec = np.zeros_like(rc)
    coarsest = hier.levels[k + 1].lu is not None
    for _ in range(1 if coarsest else cfg.gamma):
        ec = _cycle(hier, k + 1, ec, rc)
    u = u + prolong_array(ec)
    for _ in range(cfg.nu2):
        u = level.smoother.sweep(u, b)
    return u


def cycle(hier: Hierarchy, u: GridFunction, b: GridFunction, level: int = 0) -> GridFunction:
    """One V- or W-cycle starting at ``level`` (0 = finest)."""
    out = _cycle(hier, level, u.values.astype(complex), b.values.astype(complex))
    return GridFunction(u.grid, out)


def convergence_rate(history) -> float:
    """Geometric mean of the last ``min(5, k-1)`` residual ratios (``k`` iterations)."""
    k = len(history) - 1
    if k <= 0:
        return 0.0
    m = max(min(5, k - 1), 1)
    start, end = history[k - m], history[k]
    if start == 0.0:
        return 0.0
    return float((end / start) ** (1.0 / m))


def solve(
    b: GridFunction,
    shift: Shift,
    cfg: MultigridConfig,
    hierarchy: Hierarchy | None = None,
) -> SolveReport:
    """Stationary multigrid iteration from ``u0 = 0`` until ``||r_k|| <= tol ||r_0||``.

    Non-convergence is reported through ``converged=False``; the loop also
    stops early if the residual stops being finite.
    """
    t0 = time.perf_counter()
    hier = hierarchy or build_hierarchy(b.grid, shift, cfg)
    bv = b.values.astype(complex)
    u = np.zeros_like(bv)
    r0 = float(np.linalg.norm(bv))
    history = [r0]
    converged = r0 <= cfg.tol * r0
    it = 0
    while not converged and it < cfg.max_iter:
        u = _cycle(hier, 0, u, bv)
        it += 1
        rk = float(np.linalg.norm(bv - apply_laplacian_array(u, b.grid.h, shift.lam)))
        if not math.isfinite(rk):
            break
        history.append(rk)
        converged = rk <= cfg.tol * r0
    if not np.all(np.isfinite(u)):
        u = np.zeros_like(bv)
    return SolveReport(
        iterations=len(history) - 1,
        residual_history=history,
        converged=converged,
        rate=convergence_rate(history),
        wall_time=time.perf_counter() - t0,
        solution=GridFunction(b.grid, u),
    )
