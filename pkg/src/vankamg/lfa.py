"""Local Fourier analysis of the Vanka and Jacobi smoothers.

Frequencies are sampled on a uniform grid of the low range
``T_L = [-pi/2, pi/2)^2``; the high range ``T_H`` is covered by the three
harmonic shifts ``theta + (pi, 0)``, ``theta + (0, pi)``, ``theta + (pi, pi)``
of every low sample.  With an even number of samples the extremal frequency
``(pi/2, 0)`` lies on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegenerateLFAError, ShiftIncompatibleError
from .grid import Shift
from .smoothers import VANKA, SmootherConfig, vanka_coeffs

__all__ = [
    "FrequencyPair",
    "LFAConfig",
    "SmoothingReport",
    "low_frequencies",
    "symbol_L",
    "symbol_Me",
    "symbol_jacobi",
    "symbol_smoother",
    "smoothing_factor",
    "theorem1_bound",
    "two_grid_factor",
    "two_grid_factors",
    "optimize_omega",
]

HALF_PI = 0.5 * np.pi
HARMONICS = ((0, 0), (1, 0), (0, 1), (1, 1))


@dataclass(frozen=True)
class FrequencyPair:
    theta1: float
    theta2: float

    @property
    def range(self) -> str:
        """``"low"``, ``"high"`` or ``"outside"`` of ``[-pi/2, 3pi/2)^2``."""

        def inside(t, lo, hi):
            return lo <= t < hi

        if inside(self.theta1, -HALF_PI, HALF_PI) and inside(self.theta2, -HALF_PI, HALF_PI):
            return "low"
        if inside(self.theta1, -HALF_PI, 3 * HALF_PI) and inside(self.theta2, -HALF_PI, 3 * HALF_PI):
            return "high"
        return "outside"


@dataclass(frozen=True)
class LFAConfig:
    samples_per_dim: int = 64
    singular_skip_radius: float = 1e-8

    def __post_init__(self):
        if self.samples_per_dim < 16 or self.samples_per_dim % 2:
            raise ConfigurationError(
                f"samples_per_dim must be even and >= 16, got {self.samples_per_dim}"
            )


@dataclass(frozen=True)
class SmoothingReport:
    mu: float
    omega: complex
    argmax_theta: FrequencyPair


def low_frequencies(lfa: LFAConfig | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Sampled ``T_L`` as two ``(K, K)`` arrays."""
    lfa = lfa or LFAConfig()
    k = lfa.samples_per_dim
    t = -HALF_PI + np.pi * np.arange(k) / k
    return np.meshgrid(t, t, indexing="ij")


def _angles(theta):
    if isinstance(theta, FrequencyPair):
        return theta.theta1, theta.theta2
    t1, t2 = theta
    return np.asarray(t1, dtype=float), np.asarray(t2, dtype=float)


def _lam(shift) -> complex:
    return shift.lam if isinstance(shift, Shift) else complex(shift)


def symbol_L(theta, shift, h: float):
    """Symbol of ``A + lam I``: ``(4 + lam h^2 - 2 cos t1 - 2 cos t2) / h^2``."""
    t1, t2 = _angles(theta)
    return (4.0 + _lam(shift) * h * h - 2.0 * np.cos(t1) - 2.0 * np.cos(t2)) / (h * h)


def symbol_Me(theta, shift, h: float):
    """Symbol of the Vanka stencil: ``h^2 (a + b cos t1 + b cos t2 + c cos t1 cos t2)``."""
    t1, t2 = _angles(theta)
    k = vanka_coeffs(_lam(shift) * h * h)
    c1, c2 = np.cos(t1), np.cos(t2)
    return h * h * (k.a + k.b * c1 + k.b * c2 + k.c * c1 * c2)


def symbol_jacobi(theta, shift, h: float):
    t1, _ = _angles(theta)
    eta = _lam(shift) * h * h
    if abs(4.0 + eta) <= 1e-12:
        raise ShiftIncompatibleError(f"Jacobi diagonal vanishes for eta={eta}")
    return np.full(np.shape(t1), h * h / (4.0 + eta), dtype=complex)[()]


def _symbol_M(theta, shift, h, kind):
    return symbol_Me(theta, shift, h) if kind == VANKA else symbol_jacobi(theta, shift, h)


def symbol_smoother(theta, shift, h: float, cfg: SmootherConfig):
    """Amplification ``1 - omega M~ L~`` of one sweep at ``theta``."""
    return 1.0 - cfg.omega * _symbol_M(theta, shift, h, cfg.kind) * symbol_L(theta, shift, h)


def _high_samples(lfa: LFAConfig | None):
    t1, t2 = low_frequencies(lfa)
    high1 = np.stack([t1 + np.pi, t1, t1 + np.pi])
    high2 = np.stack([t2, t2 + np.pi, t2 + np.pi])
    return high1, high2


def _argmax_lowest(values: np.ndarray, t1: np.ndarray, t2: np.ndarray) -> FrequencyPair:
    # ties are common (symmetry); report the maximizer closest to the origin
    top = values.max()
    cand = np.flatnonzero(values.ravel() >= top - 1e-12 * max(top, 1.0))
    r = t1.ravel()[cand] ** 2 + t2.ravel()[cand] ** 2
    best = cand[np.argmin(r)]
    return FrequencyPair(float(t1.ravel()[best]), float(t2.ravel()[best]))


def smoothing_factor(
    shift, h: float, cfg: SmootherConfig, lfa: LFAConfig | None = None
) -> SmoothingReport:
    """``mu_loc = max over T_H of |S~(theta)|`` on the sampled high range."""
    t1, t2 = _high_samples(lfa)
    amp = np.abs(symbol_smoother((t1, t2), shift, h, cfg))
    return SmoothingReport(float(amp.max()), cfg.omega, _argmax_lowest(amp, t1, t2))


def theorem1_bound(
    shift, h: float, omega: float, kind: str = VANKA, lfa: LFAConfig | None = None
) -> tuple[float, float]:
    """Split bound ``mu_loc <= phi0 + phij``.

    ``phi0 = max |1 - omega M~_0 A~|`` uses the unshifted symbols,
    ``phij = max |omega lam M~_e|`` the shifted patch symbol; both over ``T_H``.
    """
    t1, t2 = _high_samples(lfa)
    lam = _lam(shift)
    unshifted = _symbol_M((t1, t2), 0.0, h, kind) * symbol_L((t1, t2), 0.0, h)
    phi0 = np.abs(1.0 - omega * unshifted).max()
    phij = np.abs(omega * lam * _symbol_M((t1, t2), lam, h, kind)).max()
    return float(phi0), float(phij)


class _TwoGridSymbols:
    """Frequency-independent pieces of the 4x4 two-grid symbol, cached for omega scans."""

    def __init__(self, shift, h: float, kind: str, lfa: LFAConfig | None):
        lfa = lfa or LFAConfig()
        lam = _lam(shift)
        t1, t2 = low_frequencies(lfa)
        coarse = symbol_L((2.0 * t1, 2.0 * t2), lam, 2.0 * h)
        keep = np.abs(coarse) > lfa.singular_skip_radius
        if not keep.any():
            raise DegenerateLFAError("degenerate LFA configuration: every frequency skipped")
        t1, t2, coarse = t1[keep], t2[keep], coarse[keep]
        L, ML, R = [], [], []
        for s1, s2 in HARMONICS:
            th = (t1 + s1 * np.pi, t2 + s2 * np.pi)
            l_sym = symbol_L(th, lam, h)
            L.append(l_sym)
            ML.append(_symbol_M(th, lam, h, kind) * l_sym)
            R.append(0.25 * (1.0 + np.cos(th[0])) * (1.0 + np.cos(th[1])))
        self.L = np.stack(L, axis=-1)
        self.ML = np.stack(ML, axis=-1)
        R = np.stack(R, axis=-1)
        # bilinear interpolation has the same symbol as full weighting in this scaling
        self.cgc = np.eye(4) - R[:, :, None] * (R * self.L)[:, None, :] / coarse[:, None, None]

    def rho(self, omega: complex, nu: int) -> float:
        s = (1.0 - omega * self.ML) ** nu
        e = self.cgc * s[:, None, :]
        return float(np.abs(np.linalg.eigvals(e)).max())


def two_grid_factors(
    shift, h: float, cfg: SmootherConfig, nus, lfa: LFAConfig | None = None
) -> list[float]:
    sym = _TwoGridSymbols(shift, h, cfg.kind, lfa)
    return [sym.rho(cfg.omega, int(nu)) for nu in nus]


def two_grid_factor(
    shift, h: float, cfg: SmootherConfig, nu: int = 1, lfa: LFAConfig | None = None
) -> float:
    """Two-grid factor ``rho(nu)``: max over ``T_L`` of the spectral radius of
    ``(I - P~ L~c^{-1} R~ L~) S~^nu`` with ``nu`` pre-smoothing steps.

    Frequencies where the coarse symbol ``L~c(2 theta)`` vanishes are skipped.
    """
    if nu < 0:
        raise ConfigurationError("nu must be non-negative")
    return two_grid_factors(shift, h, cfg, [nu], lfa)[0]


def _golden(f, a: float, b: float, tol: float) -> float:
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    c, d = b - inv_phi * (b - a), a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def optimize_omega(
    shift,
    h: float,
    kind: str = VANKA,
    objective: str = "rho1",
    lfa: LFAConfig | None = None,
    scan: tuple[float, float, float] = (0.1, 1.9, 0.01),
    tol: float = 1e-4,
) -> tuple[float, float]:
    """Minimize ``rho(1)`` or ``mu`` over real omega.

    A scan on ``scan = (start, stop, step)`` brackets the minimum, which is
    then refined by golden-section search to ``tol``.
    """
    kind = SmootherConfig(kind).kind
    if objective == "rho1":
        sym = _TwoGridSymbols(shift, h, kind, lfa)
        f = lambda w: sym.rho(w, 1)  # noqa: E731
    elif objective == "mu":
        t1, t2 = _high_samples(lfa)
        ml = _symbol_M((t1, t2), shift, h, kind) * symbol_L((t1, t2), shift, h)
        f = lambda w: float(np.abs(1.0 - w * ml).max())  # noqa: E731
    else:
        raise ConfigurationError(f"unknown objective {objective!r}")
    start, stop, step = scan
    grid = np.arange(start, stop + 0.5 * step, step)
    values = np.array([f(w) for w in grid])
    k = int(np.argmin(values))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    w = _golden(f, lo, hi, tol)
    fw = f(w)
    if values[k] < fw:
        w, fw = float(grid[k]), float(values[k])
    return float(w), float(fw)
