"""Additive element-wise Vanka and damped Jacobi relaxation for ``A + lam I``.

The Vanka smoother sums weighted local inverses over all 2x2 node patches
(elements).  With weight 1/4 per patch its action on interior nodes is the
constant 9-point stencil ``(h^2/4) [[c, 2b, c], [2b, 4a, 2b], [c, 2b, c]]``,
so it is applied here as an explicit stencil.  ``assemble_vanka_oracle``
builds the same operator from the patch sum and is used only for checking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, GridMismatchError, ShiftIncompatibleError
from .grid import (
    Grid2D,
    GridFunction,
    Shift,
    Stencil3x3,
    apply_laplacian_array,
    laplacian_stencil,
)

__all__ = [
    "VANKA",
    "JACOBI",
    "VankaCoeffs",
    "SmootherConfig",
    "Smoother",
    "vanka_coeffs",
    "vanka_stencil",
    "local_patch_matrix",
    "apply_smoother",
    "assemble_vanka_oracle",
]

VANKA = "vanka"
JACOBI = "jacobi"

_SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class VankaCoeffs:
    a: complex
    b: complex
    c: complex
    eta: complex


def _check_denominators(eta: complex, denominators) -> None:
    for d in denominators:
        if abs(d + eta) <= _SINGULAR_TOL:
            raise ShiftIncompatibleError(
                f"shift incompatible with Vanka patch: eta={eta} makes {d}+eta vanish"
            )


def vanka_coeffs(eta: complex) -> VankaCoeffs:
    """Stencil coefficients ``a, b, c`` for the scaled shift ``eta = lam h^2``.

    The 4x4 patch matrix has eigenvalues ``(2+eta, 4+eta, 4+eta, 6+eta) / h^2``;
    any of these vanishing raises ``ShiftIncompatibleError``.
    """
    eta = complex(eta)
    _check_denominators(eta, (2.0, 4.0, 6.0))
    r2, r4, r6 = 1.0 / (2.0 + eta), 1.0 / (4.0 + eta), 1.0 / (6.0 + eta)
    a = 0.25 * (r2 + 2.0 * r4 + r6)
    b = 0.25 * (r2 - r6)
    c = 0.25 * (r2 - 2.0 * r4 + r6)
    return VankaCoeffs(a, b, c, eta)


def vanka_stencil(shift: Shift, h: float) -> Stencil3x3:
    k = vanka_coeffs(shift.eta(h))
    coeffs = np.array(
        [[k.c, 2 * k.b, k.c], [2 * k.b, 4 * k.a, 2 * k.b], [k.c, 2 * k.b, k.c]],
        dtype=complex,
    )
    return Stencil3x3(coeffs, h * h / 4.0)


def local_patch_matrix(eta: complex, h: float) -> np.ndarray:
    """Restriction of ``A + lam I`` to one element, nodes ordered (0,0), (0,1), (1,0), (1,1)."""
    d = 4.0 + complex(eta)
    # (0,0)-(0,1), (0,0)-(1,0), (0,1)-(1,1), (1,0)-(1,1) are the element edges
    return (
        np.array(
            [[d, -1, -1, 0], [-1, d, 0, -1], [-1, 0, d, -1], [0, -1, -1, d]],
            dtype=complex,
        )
        / h**2
    )


@dataclass(frozen=True)
class SmootherConfig:
    """Smoother kind and (possibly complex) relaxation weight."""

    kind: str = VANKA
    omega: complex = 24 / 25

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in (VANKA, JACOBI):
            raise ConfigurationError(f"unknown smoother kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "omega", complex(self.omega))
        if self.omega == 0:
            raise ConfigurationError("relaxation parameter omega must be nonzero")

    @classmethod
    def vanka(cls, omega: complex = 24 / 25) -> "SmootherConfig":
        return cls(VANKA, omega)

    @classmethod
    def jacobi(cls, omega: complex = 4 / 5) -> "SmootherConfig":
        return cls(JACOBI, omega)


class Smoother:
    """One relaxation ``u <- u + omega M (b - (A + lam I) u)`` on a fixed level."""

    def __init__(self, h: float, lam: complex, cfg: SmootherConfig):
        self.h = h
        self.lam = complex(lam)
        self.cfg = cfg
        eta = self.lam * h * h
        if cfg.kind == VANKA:
            self.stencil = vanka_stencil(Shift(self.lam), h)
            self._jacobi_scale = None
        else:
            _check_denominators(eta, (4.0,))
            self.stencil = None
            self._jacobi_scale = h * h / (4.0 + eta)

    def precondition(self, r: np.ndarray, periodic: bool = False) -> np.ndarray:
        if self.stencil is None:
            return self._jacobi_scale * r
        return self.stencil.apply_array(r, periodic=periodic)

    def sweep(self, u: np.ndarray, b: np.ndarray, periodic: bool = False) -> np.ndarray:
        if periodic:
            lu = laplacian_stencil(self.h, self.lam).apply_array(u, periodic=True)
        else:
            lu = apply_laplacian_array(u, self.h, self.lam)
        return u + self.cfg.omega * self.precondition(b - lu, periodic=periodic)


def apply_smoother(
    u: GridFunction, b: GridFunction, shift: Shift, cfg: SmootherConfig
) -> GridFunction:
    """One smoothing sweep; the error map is ``I - omega M (A + lam I)``."""
    if u.grid != b.grid:
        raise GridMismatchError(f"iterate on N={u.grid.N}, rhs on N={b.grid.N}")
    smoother = Smoother(u.grid.h, shift.lam, cfg)
    return GridFunction(u.grid, smoother.sweep(u.values, b.values))


def assemble_vanka_oracle(grid: Grid2D, shift: Shift) -> sp.csr_matrix:
    """Patch sum ``sum_i R_i^T (I/4) L_i^{-1} R_i`` over all fully interior elements.

    Elements touching the boundary are left out, so only rows of nodes whose
    four surrounding elements are all interior agree with ``vanka_stencil``.
    Meant for small grids.
    """
    h = grid.h
    eta = shift.eta(h)
    _check_denominators(eta, (2.0, 4.0, 6.0))
    local_inv = 0.25 * np.linalg.inv(local_patch_matrix(eta, h))
    m = grid.n_interior
    ii, jj = np.meshgrid(np.arange(m - 1), np.arange(m - 1), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    nodes = np.stack([ii * m + jj, ii * m + jj + 1, (ii + 1) * m + jj, (ii + 1) * m + jj + 1], axis=1)
    rows = np.repeat(nodes, 4, axis=1).ravel()
    cols = np.tile(nodes, (1, 4)).ravel()
    data = np.tile(local_inv.ravel(), len(ii))
    return sp.coo_matrix((data, (rows, cols)), shape=(m * m, m * m)).tocsr()
