"""Time matrices, their diagonalization and the diagonalized all-at-once solve.

The all-at-once system ``(B kron I + I kron A) u = f`` is solved as

1. ``g = (V^{-1} kron I) f``
2. ``(A + lam_j I) w_j = g_j`` for every eigenvalue ``lam_j`` of ``B`` (independent)
3. ``u = (V kron I) w``

Space-time vectors are stored as arrays of shape ``(n_time, N-1, N-1)``.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import ConfigurationError, EigenSolverError, GridMismatchError
from .grid import Grid2D, GridFunction, Shift, apply_laplacian_array, shifted_laplacian_matrix
from .multigrid import MultigridConfig, SolveReport, solve

__all__ = [
    "HEAT_BVM",
    "BACKWARD_HEAT",
    "HELMHOLTZ",
    "TimeDiscretization",
    "Diagonalization",
    "ParadiagResult",
    "build_B",
    "diagonalize",
    "diagonalize_alpha_circulant",
    "diagonalize_time",
    "time_shifts",
    "helmholtz_shifts",
    "kron_time_transform",
    "kron_apply",
    "all_at_once_apply",
    "all_at_once_matrix",
    "manufactured_problem",
    "paradiag_solve",
]

HEAT_BVM = "heat-bvm"
BACKWARD_HEAT = "backward-heat"
HELMHOLTZ = "helmholtz"
_KINDS = (HEAT_BVM, BACKWARD_HEAT, HELMHOLTZ)

COND_WARN = 1e12


@dataclass(frozen=True)
class TimeDiscretization:
    """Which time matrix to build.

    ``n`` is the number of time steps (number of wavenumbers for the Helmholtz
    family); the backward-heat matrix has ``n + 1`` rows.
    """

    kind: str
    n: int
    tau: float | None = None
    beta: float = 0.01

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in _KINDS:
            raise ConfigurationError(f"unknown time discretization {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.n < 1:
            raise ConfigurationError("n must be >= 1")
        if self.tau is None:
            object.__setattr__(self, "tau", 1.0 / self.n)
        if not self.tau > 0:
            raise ConfigurationError("tau must be positive")
        if kind == BACKWARD_HEAT and not self.beta > 0:
            raise ConfigurationError("beta must be positive")

    @property
    def dim(self) -> int:
        return self.n + 1 if self.kind == BACKWARD_HEAT else self.n

    def time_points(self) -> np.ndarray:
        if self.kind == BACKWARD_HEAT:
            return self.tau * np.arange(self.n + 1)
        return self.tau * np.arange(1, self.n + 1)


def build_B(td: TimeDiscretization) -> np.ndarray:
    n = td.n
    if td.kind == HEAT_BVM:
        B = np.zeros((n, n))
        idx = np.arange(n - 1)
        B[idx, idx + 1] = 0.5
        B[idx[1:], idx[1:] - 1] = -0.5
        if n == 1:
            B[0, 0] = 1.0
        else:
            B[n - 1, n - 2] = -1.0
            B[n - 1, n - 1] = 1.0
        return B / td.tau
    if td.kind == BACKWARD_HEAT:
        m = n + 1
        B = np.eye(m) - np.eye(m, k=-1)
        B[0, m - 1] = 1.0 / td.beta
        return B / td.tau
    raise ConfigurationError("the Helmholtz family has no time matrix; use helmholtz_shifts")


@dataclass
class Diagonalization:
    """``B = V diag(eigenvalues) V^{-1}`` with ``V^{-1}`` kept as LU factors of ``V``."""

    eigenvalues: np.ndarray
    V: np.ndarray
    lu: tuple = field(repr=False)
    cond_estimate: float
    ill_conditioned: bool = False

    @classmethod
    def from_pairs(cls, eigenvalues, V) -> "Diagonalization":
        V = np.asarray(V, dtype=complex)
        cond = float(np.linalg.cond(V))
        ill = not np.isfinite(cond) or cond > COND_WARN
        if ill:
            warnings.warn(f"eigenvector matrix is nearly defective (cond ~ {cond:.3g})", RuntimeWarning)
        return cls(np.asarray(eigenvalues, dtype=complex), V, sla.lu_factor(V), cond, ill)

    @property
    def Vinv(self) -> np.ndarray:
        return sla.lu_solve(self.lu, np.eye(len(self.eigenvalues), dtype=complex))

    def apply_V(self, stack: np.ndarray) -> np.ndarray:
        return kron_apply(self.V, stack)

    def apply_Vinv(self, stack: np.ndarray) -> np.ndarray:
        flat = np.asarray(stack, dtype=complex).reshape(stack.shape[0], -1)
        return sla.lu_solve(self.lu, flat).reshape(stack.shape)

    def shifts(self, source: str = "eigenvalue-of-B") -> list[Shift]:
        return [Shift(lam, j, source) for j, lam in enumerate(self.eigenvalues, start=1)]


def diagonalize(B: np.ndarray) -> Diagonalization:
    """Eigendecomposition of a dense (nonsymmetric) matrix via LAPACK ``geev``."""
    B = np.asarray(B)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ConfigurationError(f"B must be square, got shape {B.shape}")
    try:
        lam, V = np.linalg.eig(B)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigensolver failed: {exc}") from exc
    return Diagonalization.from_pairs(lam, V)


def diagonalize_alpha_circulant(td: TimeDiscretization) -> Diagonalization:
    """Closed-form diagonalization of the backward-heat matrix.

    ``B = (I - S_alpha) / tau`` with ``S_alpha`` the down-shift whose corner is
    ``alpha = -1/beta``.  With ``a = alpha^(1/m)`` and ``zeta = exp(2 pi i/m)``
    the eigenvalues are ``(1 - a zeta^k) / tau`` and the eigenvectors are
    ``a^(-j) zeta^(-jk)``.
    """
    if td.kind != BACKWARD_HEAT:
        raise ConfigurationError("closed form applies to the backward-heat matrix only")
    m = td.n + 1
    alpha = -1.0 / td.beta
    a = complex(alpha) ** (1.0 / m)
    jk = np.outer(np.arange(m), np.arange(m))
    zeta = np.exp(2j * np.pi * np.arange(m) / m)
    lam = (1.0 - a * zeta) / td.tau
    V = a ** (-np.arange(m))[:, None] * np.exp(-2j * np.pi * jk / m)
    return Diagonalization.from_pairs(lam, V)


def diagonalize_time(td: TimeDiscretization, fast: bool = True) -> Diagonalization:
    if td.kind == BACKWARD_HEAT and fast:
        return diagonalize_alpha_circulant(td)
    return diagonalize(build_B(td))


def helmholtz_shifts(h: float, max_wavenumber: int = 128) -> list[Shift]:
    """``lam_j = -j^2 (1 - 0.5i)`` for ``j = 1..128`` with ``j h <= 1/2``."""
    jmax = min(max_wavenumber, int(np.floor(0.5 / h + 1e-9)))
    return [Shift(-(j**2) * (1 - 0.5j), j, "helmholtz") for j in range(1, jmax + 1)]


def time_shifts(td: TimeDiscretization, h: float | None = None) -> list[Shift]:
    if td.kind == HELMHOLTZ:
        return helmholtz_shifts(h if h is not None else td.tau, td.n)
    return diagonalize_time(td).shifts()


def kron_apply(matrix: np.ndarray, stack: np.ndarray) -> np.ndarray:
    """``(matrix kron I_h)`` on a ``(n_time, ...)`` stack."""
    matrix = np.asarray(matrix)
    stack = np.asarray(stack)
    if matrix.shape[1] != stack.shape[0]:
        raise GridMismatchError(
            f"time dimension mismatch: matrix {matrix.shape}, {stack.shape[0]} slices"
        )
    return np.tensordot(matrix, stack, axes=(1, 0))


def kron_time_transform(matrix: np.ndarray, u_all) -> list[GridFunction]:
    if not u_all:
        raise GridMismatchError("empty space-time list")
    grid = u_all[0].grid
    if any(u.grid != grid for u in u_all):
        raise GridMismatchError("space-time slices live on different grids")
    out = kron_apply(matrix, np.stack([u.values for u in u_all]))
    return [GridFunction(grid, v) for v in out]


def all_at_once_apply(B: np.ndarray, stack: np.ndarray, h: float) -> np.ndarray:
    """``(B kron I + I kron A) u``."""
    out = kron_apply(B, stack).astype(complex)
    for k in range(stack.shape[0]):
        out[k] += apply_laplacian_array(stack[k], h)
    return out


def all_at_once_matrix(B: np.ndarray, grid: Grid2D) -> sp.csr_matrix:
    A = shifted_laplacian_matrix(grid, 0.0)
    return (sp.kron(sp.csr_matrix(B), sp.identity(grid.size)) + sp.kron(sp.identity(B.shape[0]), A)).tocsr()


def manufactured_problem(td: TimeDiscretization, grid: Grid2D) -> tuple[np.ndarray, np.ndarray]:
    """Exact field ``sin(pi x) sin(pi y) (1 + t)`` at the time points and its right-hand side."""
    x, y = grid.coordinates()
    space = np.sin(np.pi * x) * np.sin(np.pi * y)
    u = (1.0 + td.time_points())[:, None, None] * space[None]
    return u, all_at_once_apply(build_B(td), u, grid.h)


@dataclass
class ParadiagResult:
    u_all: list[GridFunction]
    reports: list[SolveReport]
    diagonalization: Diagonalization
    converged: bool

    def __iter__(self):
        return iter((self.u_all, self.reports))

    def stack(self) -> np.ndarray:
        return np.stack([u.values for u in self.u_all])


def paradiag_solve(
    f_all,
    td: TimeDiscretization,
    grid: Grid2D,
    cfg: MultigridConfig,
    jobs: int = 1,
    diag: Diagonalization | None = None,
) -> ParadiagResult:
    """Solve the all-at-once system through ``dim`` independent shifted multigrid solves."""
    if td.kind == HELMHOLTZ:
        raise ConfigurationError("paradiag_solve needs a time matrix")
    f = np.stack([fk.values for fk in f_all]) if isinstance(f_all, (list, tuple)) else np.asarray(f_all)
    if f.shape != (td.dim, *grid.shape):
        raise GridMismatchError(f"rhs shape {f.shape} does not match {(td.dim, *grid.shape)}")
    diag = diag or diagonalize_time(td)
    g = diag.apply_Vinv(f)
    shifts = diag.shifts()

    def one(j):
        return solve(GridFunction(grid, g[j]), shifts[j], cfg)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(one, range(td.dim)))
    else:
        reports = [one(j) for j in range(td.dim)]
    w = np.stack([r.solution.values for r in reports])
    u = diag.apply_V(w)
    return ParadiagResult(
        [GridFunction(grid, uk) for uk in u],
        reports,
        diag,
        all(r.converged for r in reports),
    )
