"""Uniform grids on the unit square, the shifted five-point operator and grid transfers.

Grid functions store interior values only, as a ``(N-1, N-1)`` complex array
indexed ``[i-1, j-1]`` for the interior node ``(x_i, y_j) = (i h, j h)``.
Homogeneous Dirichlet conditions are imposed through zero ghost values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, GridMismatchError

__all__ = [
    "Grid2D",
    "GridFunction",
    "Stencil3x3",
    "Shift",
    "parse_step",
    "laplacian_stencil",
    "apply_laplacian_array",
    "apply_shifted_laplacian",
    "residual",
    "restrict_full_weighting",
    "prolong_bilinear",
    "restrict_array",
    "prolong_array",
    "shifted_laplacian_matrix",
]


def parse_step(value: str | float | int | Fraction) -> int:
    """Convert a mesh step such as ``"1/256"`` or ``0.125`` to ``N = 1/h``.

    Raises ``ConfigurationError`` unless ``1/h`` is an integer >= 2.
    """
    if isinstance(value, str):
        value = value.strip()
    try:
        frac = Fraction(value).limit_denominator(1 << 20)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigurationError(f"cannot parse mesh step {value!r}") from exc
    if frac <= 0 or frac.numerator != 1 or frac.denominator < 2:
        raise ConfigurationError(f"mesh step must be 1/N with N >= 2, got {value!r}")
    return frac.denominator


@dataclass(frozen=True)
class Grid2D:
    """Uniform grid with ``N`` subdivisions per side of the unit square."""

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ConfigurationError(f"N must be an integer >= 2, got {self.N!r}")

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def n_interior(self) -> int:
        return self.N - 1

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N - 1, self.N - 1)

    @property
    def size(self) -> int:
        return (self.N - 1) ** 2

    def coarsen(self) -> "Grid2D":
        if self.N % 2:
            raise ConfigurationError(f"cannot coarsen a grid with odd N={self.N}")
        return Grid2D(self.N // 2)

    def refine(self) -> "Grid2D":
        return Grid2D(2 * self.N)

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Interior node coordinates as two ``(N-1, N-1)`` arrays (``ij`` indexing)."""
        x = np.arange(1, self.N) * self.h
        return np.meshgrid(x, x, indexing="ij")

    def zeros(self) -> "GridFunction":
        return GridFunction(self, np.zeros(self.shape, dtype=complex))

    def sample(self, func) -> "GridFunction":
        x, y = self.coordinates()
        return GridFunction(self, np.asarray(func(x, y), dtype=complex))


@dataclass
class GridFunction:
    """Complex field on the interior nodes of ``grid``."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            if values.size != self.grid.size:
                raise GridMismatchError(
                    f"values of shape {values.shape} do not fit grid N={self.grid.N}"
                )
            values = values.reshape(self.grid.shape)
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function has non-finite entries")
        self.values = values

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def ravel(self) -> np.ndarray:
        return self.values.ravel()

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())

    def _check(self, other: "GridFunction"):
        if other.grid != self.grid:
            raise GridMismatchError(f"grid N={self.grid.N} vs N={other.grid.N}")

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check(other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, alpha: complex) -> "GridFunction":
        return GridFunction(self.grid, alpha * self.values)

    __rmul__ = __mul__


@dataclass(frozen=True)
class Shift:
    """Complex shift ``lam`` of ``A + lam I``.

    ``source`` records where it came from: ``"eigenvalue-of-B"``,
    ``"helmholtz"`` or ``"user"``.
    """

    lam: complex
    index: int | None = None
    source: str = "user"

    def __post_init__(self):
        object.__setattr__(self, "lam", complex(self.lam))

    def eta(self, h: float) -> complex:
        return self.lam * h * h


@dataclass(frozen=True)
class Stencil3x3:
    """Constant 9-point stencil ``scale * coeffs``; ``coeffs[1 + di, 1 + dj]`` weights ``u[i + di, j + dj]``."""

    coeffs: np.ndarray
    scale: float = 1.0
    _weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != (3, 3):
            raise ValueError(f"stencil must be 3x3, got {coeffs.shape}")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "_weights", self.scale * coeffs)

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    def apply_array(self, u: np.ndarray, periodic: bool = False) -> np.ndarray:
        """Apply to an interior array with zero ghosts, or with wrap-around if ``periodic``."""
        w = self._weights
        if periodic:
            out = np.zeros_like(u, dtype=complex)
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    c = w[1 + di, 1 + dj]
                    if c != 0:
                        out += c * np.roll(u, (-di, -dj), axis=(0, 1))
            return out
        n0, n1 = u.shape
        up = np.zeros((n0 + 2, n1 + 2), dtype=complex)
        up[1:-1, 1:-1] = u
        out = np.zeros((n0, n1), dtype=complex)
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                c = w[1 + di, 1 + dj]
                if c != 0:
                    out += c * up[1 + di : 1 + di + n0, 1 + dj : 1 + dj + n1]
        return out

    def apply(self, u: GridFunction) -> GridFunction:
        return GridFunction(u.grid, self.apply_array(u.values))

    def symbol(self, theta1, theta2):
        """Fourier symbol ``sum_k w_k exp(i theta . k)``."""
        theta1 = np.asarray(theta1, dtype=float)
        theta2 = np.asarray(theta2, dtype=float)
        out = np.zeros(np.broadcast(theta1, theta2).shape, dtype=complex)
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                out += self._weights[1 + di, 1 + dj] * np.exp(1j * (di * theta1 + dj * theta2))
        return out


def laplacian_stencil(h: float, lam: complex = 0.0) -> Stencil3x3:
    """Five-point stencil of ``A + lam I`` with ``A = -Laplacian`` on step ``h``."""
    coeffs = np.array([[0, -1, 0], [-1, 4 + lam * h * h, -1], [0, -1, 0]], dtype=complex)
    return Stencil3x3(coeffs, 1.0 / (h * h))


def apply_laplacian_array(u: np.ndarray, h: float, lam: complex = 0.0) -> np.ndarray:
    """``(A + lam I) u`` on an interior array, zero Dirichlet ghosts."""
    inv_h2 = 1.0 / (h * h)
    out = (4.0 * inv_h2 + lam) * u
    out[1:, :] -= inv_h2 * u[:-1, :]
    out[:-1, :] -= inv_h2 * u[1:, :]
    out[:, 1:] -= inv_h2 * u[:, :-1]
    out[:, :-1] -= inv_h2 * u[:, 1:]
    return out


def apply_shifted_laplacian(u: GridFunction, shift: Shift) -> GridFunction:
    return GridFunction(u.grid, apply_laplacian_array(u.values, u.grid.h, shift.lam))


def residual(b: GridFunction, u: GridFunction, shift: Shift) -> GridFunction:
    """``b - (A + lam I) u``."""
    if b.grid != u.grid:
        raise GridMismatchError(f"rhs on N={b.grid.N}, iterate on N={u.grid.N}")
    return GridFunction(b.grid, b.values - apply_laplacian_array(u.values, u.grid.h, shift.lam))


def restrict_array(fine: np.ndarray) -> np.ndarray:
    """Full weighting ``(1/16)[1 2 1; 2 4 2; 1 2 1]`` from an ``(N-1)^2`` to an ``(N/2-1)^2`` array."""
    n = fine.shape[0] + 1
    if n % 2:
        raise ConfigurationError(f"full weighting needs even N, got N={n}")
    f = np.zeros((n + 1, n + 1), dtype=np.result_type(fine, float))
    f[1:-1, 1:-1] = fine
    # fine full index 2I sits under coarse node I
    c = slice(2, n - 1, 2)
    m = slice(1, n - 2, 2)
    p = slice(3, n, 2)
    return (
        4.0 * f[c, c]
        + 2.0 * (f[m, c] + f[p, c] + f[c, m] + f[c, p])
        + (f[m, m] + f[m, p] + f[p, m] + f[p, p])
    ) / 16.0


def prolong_array(coarse: np.ndarray) -> np.ndarray:
    """Bilinear interpolation from an ``(Nc-1)^2`` to a ``(2Nc-1)^2`` array."""
    nc = coarse.shape[0] + 1
    c = np.zeros((nc + 1, nc + 1), dtype=np.result_type(coarse, float))
    c[1:-1, 1:-1] = coarse
    n = 2 * nc
    f = np.zeros((n + 1, n + 1), dtype=c.dtype)
    f[0::2, 0::2] = c
    f[1::2, 0::2] = 0.5 * (c[:-1, :] + c[1:, :])
    f[0::2, 1::2] = 0.5 * (c[:, :-1] + c[:, 1:])
    f[1::2, 1::2] = 0.25 * (c[:-1, :-1] + c[1:, :-1] + c[:-1, 1:] + c[1:, 1:])
    return f[1:-1, 1:-1]


def restrict_full_weighting(fine: GridFunction) -> GridFunction:
    coarse_grid = fine.grid.coarsen()
    return GridFunction(coarse_grid, restrict_array(fine.values))


def prolong_bilinear(coarse: GridFunction) -> GridFunction:
    return GridFunction(coarse.grid.refine(), prolong_array(coarse.values))


def shifted_laplacian_matrix(grid: Grid2D, lam: complex = 0.0) -> sp.csr_matrix:
    """Sparse ``A + lam I`` in the row-major interior ordering used by ``GridFunction.ravel``."""
    m = grid.n_interior
    h2 = grid.h**2
    t = sp.diags([-np.ones(m - 1), 2 * np.ones(m), -np.ones(m - 1)], [-1, 0, 1])
    eye = sp.identity(m)
    a = (sp.kron(t, eye) + sp.kron(eye, t)) / h2
    return (a + lam * sp.identity(m * m)).astype(complex).tocsr()
