import numpy as np
import pytest

from conftest import heat_matrix
from vankamg.errors import ConfigurationError, DegenerateLFAError
from vankamg.lfa import (
    FrequencyPair,
    LFAConfig,
    low_frequencies,
    optimize_omega,
    smoothing_factor,
    symbol_L,
    symbol_Me,
    symbol_smoother,
    theorem1_bound,
    two_grid_factor,
    two_grid_factors,
)
from vankamg.grid import Shift
from vankamg.smoothers import SmootherConfig, vanka_stencil

VANKA = SmootherConfig.vanka(0.96)
JACOBI = SmootherConfig.jacobi(0.80)
PI = np.pi


@pytest.fixture(scope="module")
def heat256():
    return np.linalg.eigvals(heat_matrix(256, 1 / 256))


@pytest.mark.parametrize(
    "theta,lam,h,expected",
    [((0, 0), 3 + 4j, 0.1, 3 + 4j), ((PI, PI), 0, 1, 8), ((PI / 2, 0), 0, 1, 2)],
)
def test_symbol_L(theta, lam, h, expected):
    assert symbol_L(theta, lam, h) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("theta,expected", [((0, 0), 0.5), ((PI, PI), 1 / 6), ((PI / 2, PI / 2), 7 / 24)])
def test_symbol_Me(theta, expected):
    assert symbol_Me(theta, 0, 1.0) == pytest.approx(expected, abs=1e-15)


def test_symbol_Me_equals_stencil_symbol(rng):
    h, lam = 1 / 32, 500 - 200j
    t1, t2 = rng.uniform(-PI, PI, size=(2, 50))
    np.testing.assert_allclose(symbol_Me((t1, t2), lam, h), vanka_stencil(Shift(lam), h).symbol(t1, t2), rtol=1e-13)


def test_symbol_smoother_values():
    assert symbol_smoother((PI / 2, 0), 0, 1.0, SmootherConfig.vanka()) == pytest.approx(7 / 25)
    assert symbol_smoother((PI, PI), 0, 1.0, SmootherConfig.vanka()) == pytest.approx(-7 / 25)
    assert symbol_smoother((PI / 2, 0), 0, 1.0, SmootherConfig.jacobi()) == pytest.approx(3 / 5)


def test_frequency_ranges():
    assert FrequencyPair(0.0, -PI / 2).range == "low"
    assert FrequencyPair(PI / 2, 0.0).range == "high"
    assert FrequencyPair(PI, PI).range == "high"
    assert FrequencyPair(3 * PI / 2, 0.0).range == "outside"
    t1, t2 = low_frequencies(LFAConfig(16))
    assert all(FrequencyPair(a, b).range == "low" for a, b in zip(t1.ravel(), t2.ravel()))


def test_lfa_config_validation():
    with pytest.raises(ConfigurationError):
        LFAConfig(samples_per_dim=15)
    with pytest.raises(ConfigurationError):
        LFAConfig(samples_per_dim=8)


def test_smoothing_factor_closed_form():
    rep = smoothing_factor(0, 1 / 64, SmootherConfig.vanka())
    assert abs(rep.mu - 7 / 25) < 1e-10
    assert (abs(rep.argmax_theta.theta1), abs(rep.argmax_theta.theta2)) in [(PI / 2, 0.0), (0.0, PI / 2)]
    rep = smoothing_factor(0, 1 / 64, SmootherConfig.jacobi())
    assert abs(rep.mu - 0.6) < 1e-10


def test_smoothing_factor_heat_shift(heat256):
    mu = smoothing_factor(heat256[0], 1 / 256, VANKA).mu
    assert abs(mu - 0.280) < 0.005


def test_symmetry_under_sign_flip(rng):
    lam, h = 200 + 100j, 1 / 64
    t1, t2 = rng.uniform(-PI / 2, 3 * PI / 2, size=(2, 100))
    for cfg in (VANKA, JACOBI):
        a = symbol_smoother((t1, t2), lam, h, cfg)
        np.testing.assert_allclose(symbol_smoother((-t1, t2), lam, h, cfg), a, rtol=1e-14)
        np.testing.assert_allclose(symbol_smoother((t1, -t2), lam, h, cfg), a, rtol=1e-14)


def test_smoothing_bound_unshifted():
    phi0, phij = theorem1_bound(0, 1 / 64, 24 / 25)
    assert phi0 == pytest.approx(7 / 25, abs=1e-12)
    assert phij == 0.0


def test_smoothing_bound_shift_term_small(heat256):
    h = 1 / 256
    phi0, phij = theorem1_bound(heat256[0], h, 0.96)
    eta = abs(heat256[0]) * h * h
    assert phij < 0.05
    assert phij <= 0.96 * eta / 2 * 1.01  # |omega lam Me| <= omega |eta| max|a+2b+c| ~ omega |eta| / 2


@pytest.mark.parametrize("n", [16, 64])
def test_smoothing_bound_inequality_holds(n):
    h = 1 / n
    for lam in np.linalg.eigvals(heat_matrix(n, h)):
        mu = smoothing_factor(lam, h, VANKA).mu
        phi0, phij = theorem1_bound(lam, h, 0.96)
        assert mu <= phi0 + phij + 1e-10


def test_two_grid_table_values_fixed_omega(heat256):
    lam = heat256[0]
    vanka = two_grid_factors(lam, 1 / 256, VANKA, [1, 2, 3, 4])
    jacobi = two_grid_factors(lam, 1 / 256, JACOBI, [1, 2, 3, 4])
    np.testing.assert_allclose(vanka, [0.280, 0.116, 0.082, 0.064], atol=0.005)
    np.testing.assert_allclose(jacobi, [0.600, 0.360, 0.216, 0.137], atol=0.005)
    assert all(np.diff(vanka) <= 0) and all(np.diff(jacobi) <= 0)
    mu = smoothing_factor(lam, 1 / 256, VANKA).mu
    assert abs(vanka[0] - mu) < 0.005


def test_two_grid_unshifted_skips_zero_mode():
    rho = two_grid_factor(0, 1 / 64, VANKA, 1)
    assert abs(rho - 0.28) < 0.005


def test_two_grid_nu_zero_is_coarse_correction_only():
    # without smoothing the coarse-grid correction leaves the high harmonics untouched
    assert two_grid_factor(0, 1 / 64, VANKA, 0) == pytest.approx(1.0, abs=1e-10)


def test_two_grid_degenerate():
    with pytest.raises(DegenerateLFAError):
        two_grid_factor(0, 1 / 64, VANKA, 1, LFAConfig(16, singular_skip_radius=1e300))


def test_optimize_mu_unshifted():
    w, mu = optimize_omega(0, 1 / 64, "vanka", "mu")
    assert abs(w - 0.96) < 1e-3
    assert abs(mu - 7 / 25) < 1e-4
    w, mu = optimize_omega(0, 1 / 64, "jacobi", "mu")
    assert abs(w - 0.8) < 1e-3
    assert abs(mu - 0.6) < 1e-4


def test_optimize_rejects_unknown_objective():
    with pytest.raises(ConfigurationError):
        optimize_omega(0, 1 / 64, "vanka", "rho7")


def test_shift_uniformity_of_optimum(heat256):
    h = 1 / 256
    results = np.array([optimize_omega(lam, h, "vanka", "mu") for lam in heat256])
    assert np.ptp(results[:, 0]) < 0.01
    assert np.ptp(results[:, 1]) < 0.01
