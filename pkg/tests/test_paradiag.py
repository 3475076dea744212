import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from conftest import dense_shifted_laplacian, heat_matrix
from vankamg.errors import ConfigurationError, GridMismatchError
from vankamg.grid import Grid2D, GridFunction
from vankamg.multigrid import MultigridConfig
from vankamg.paradiag import (
    BACKWARD_HEAT,
    HEAT_BVM,
    HELMHOLTZ,
    TimeDiscretization,
    all_at_once_apply,
    build_B,
    diagonalize,
    diagonalize_alpha_circulant,
    diagonalize_time,
    helmholtz_shifts,
    kron_time_transform,
    manufactured_problem,
    paradiag_solve,
)


def dense_all_at_once(B, N):
    """Kronecker system from numpy.kron on dense factors."""
    A = dense_shifted_laplacian(N)
    return np.kron(B, np.eye(A.shape[0])) + np.kron(np.eye(B.shape[0]), A)


def matched_distance(a, b):
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return cost[r, c].max()


def test_heat_matrix_pattern():
    B = build_B(TimeDiscretization(HEAT_BVM, 3, 1.0))
    np.testing.assert_array_equal(B, [[0, 0.5, 0], [-0.5, 0, 0.5], [0, -1, 1]])
    np.testing.assert_array_equal(build_B(TimeDiscretization(HEAT_BVM, 40)), heat_matrix(40, 1 / 40))


def test_backward_heat_pattern():
    B = build_B(TimeDiscretization(BACKWARD_HEAT, 2, 1.0, beta=0.01))
    np.testing.assert_allclose(B, [[1, 0, 100], [-1, 1, 0], [0, -1, 1]])


@pytest.mark.parametrize("kind", [HEAT_BVM, BACKWARD_HEAT])
def test_tau_scaling(kind):
    B1 = build_B(TimeDiscretization(kind, 5, 1.0))
    B2 = build_B(TimeDiscretization(kind, 5, 0.5))
    np.testing.assert_allclose(B2, 2 * B1)


def test_helmholtz_has_no_matrix():
    with pytest.raises(ConfigurationError):
        build_B(TimeDiscretization(HELMHOLTZ, 8))


def test_time_discretization_validation():
    with pytest.raises(ConfigurationError):
        TimeDiscretization("crank-nicolson", 4)
    with pytest.raises(ConfigurationError):
        TimeDiscretization(BACKWARD_HEAT, 4, beta=0.0)
    assert TimeDiscretization(BACKWARD_HEAT, 4).dim == 5
    assert TimeDiscretization(HEAT_BVM, 4).tau == 0.25


@pytest.mark.parametrize("n", [16, 64, 256])
def test_heat_eigenvalue_bound(n):
    lam = diagonalize(build_B(TimeDiscretization(HEAT_BVM, n))).eigenvalues
    assert np.all(np.abs(lam) < n + np.sqrt(n / 2))
    # shifts are O(1/h) with h = tau = 1/n
    assert np.abs(lam).max() / n <= 1 + np.sqrt(1 / (2 * n)) + 1e-12


@pytest.mark.parametrize("kind,n", [(HEAT_BVM, 16), (HEAT_BVM, 128), (BACKWARD_HEAT, 32)])
def test_diagonalization_residual(kind, n):
    B = build_B(TimeDiscretization(kind, n))
    for d in (diagonalize(B), diagonalize_time(TimeDiscretization(kind, n))):
        norm_B = np.linalg.norm(B, 2)
        for j in range(len(d.eigenvalues)):
            v = d.V[:, j]
            assert np.linalg.norm(B @ v - d.eigenvalues[j] * v) <= 1e-10 * norm_B * np.linalg.norm(v)
        assert np.isfinite(d.cond_estimate) and not d.ill_conditioned


def test_alpha_circulant_matches_general_eigensolver():
    td = TimeDiscretization(BACKWARD_HEAT, 16, 1 / 16, beta=0.01)
    fast = diagonalize_alpha_circulant(td).eigenvalues
    general = np.linalg.eigvals(build_B(td))
    assert matched_distance(fast, general) < 1e-9


def test_alpha_circulant_requires_backward_heat():
    with pytest.raises(ConfigurationError):
        diagonalize_alpha_circulant(TimeDiscretization(HEAT_BVM, 4))


def test_one_by_one():
    d = diagonalize(np.array([[3.5]]))
    assert d.eigenvalues[0] == 3.5
    np.testing.assert_allclose(d.V, [[1.0]])


def test_vinv_is_inverse():
    d = diagonalize_time(TimeDiscretization(HEAT_BVM, 16))
    np.testing.assert_allclose(d.Vinv @ d.V, np.eye(16), atol=1e-10 * d.cond_estimate)


def test_helmholtz_shifts():
    s = helmholtz_shifts(1 / 128)
    assert len(s) == 64
    assert s[0].lam == -1 + 0.5j and s[0].index == 1
    assert s[1].lam == -4 + 2j
    assert len(helmholtz_shifts(1 / 512)) == 128
    assert len(helmholtz_shifts(1 / 8)) == 4


def test_kron_transform_identity_and_2x2(rng):
    g = Grid2D(4)
    f = GridFunction(g, rng.standard_normal(g.shape))
    k = GridFunction(g, rng.standard_normal(g.shape))
    out = kron_time_transform(np.eye(2), [f, k])
    np.testing.assert_array_equal(out[0].values, f.values)
    out = kron_time_transform(np.array([[1, 1], [1, -1]]), [f, k])
    np.testing.assert_allclose(out[0].values, f.values + k.values)
    np.testing.assert_allclose(out[1].values, f.values - k.values)
    with pytest.raises(GridMismatchError):
        kron_time_transform(np.eye(3), [f, k])


def test_kron_round_trip(rng):
    d = diagonalize_time(TimeDiscretization(HEAT_BVM, 16))
    g = Grid2D(8)
    u = [GridFunction(g, rng.standard_normal(g.shape)) for _ in range(16)]
    back = kron_time_transform(d.Vinv, kron_time_transform(d.V, u))
    err = np.linalg.norm([b.values - a.values for a, b in zip(u, back)])
    assert err < 1e-9 * np.linalg.norm([a.values for a in u])


def test_all_at_once_apply_matches_kron(rng):
    B = heat_matrix(3, 1 / 3)
    N = 4
    u = rng.standard_normal((3, 3, 3))
    np.testing.assert_allclose(
        all_at_once_apply(B, u, 1 / N).ravel(), dense_all_at_once(B, N) @ u.ravel(), rtol=1e-13
    )


def test_paradiag_tiny_matches_dense(rng):
    # n = 4 time steps, N = 4 (9 spatial unknowns): the grid is the coarsest level
    td = TimeDiscretization(HEAT_BVM, 4)
    g = Grid2D(4)
    f = rng.standard_normal((4, *g.shape))
    res = paradiag_solve(f, td, g, MultigridConfig(h0=1 / 4))
    direct = np.linalg.solve(dense_all_at_once(heat_matrix(4, 0.25), 4), f.ravel())
    assert np.linalg.norm(res.stack().ravel() - direct) < 1e-8 * np.linalg.norm(direct)


@pytest.mark.parametrize("kind", [HEAT_BVM, BACKWARD_HEAT])
def test_paradiag_multilevel_matches_dense(rng, kind):
    td = TimeDiscretization(kind, 4)
    g = Grid2D(16)
    f = rng.standard_normal((td.dim, *g.shape))
    res = paradiag_solve(f, td, g, MultigridConfig(tol=1e-13))
    assert res.converged
    direct = np.linalg.solve(dense_all_at_once(build_B(td), 16), f.ravel())
    assert np.linalg.norm(res.stack().ravel() - direct) < 1e-8 * np.linalg.norm(direct)


def test_paradiag_zero_rhs():
    td = TimeDiscretization(HEAT_BVM, 8)
    g = Grid2D(8)
    u_all, reports = paradiag_solve(np.zeros((8, *g.shape)), td, g, MultigridConfig())
    assert all(np.all(u.values == 0) for u in u_all)
    assert all(r.iterations == 0 for r in reports)


def test_paradiag_rejects_bad_shapes(rng):
    td = TimeDiscretization(HEAT_BVM, 4)
    with pytest.raises(GridMismatchError):
        paradiag_solve(np.zeros((3, 7, 7)), td, Grid2D(8), MultigridConfig())


@pytest.mark.parametrize("kind", [HEAT_BVM, BACKWARD_HEAT])
def test_manufactured_residual(kind):
    td = TimeDiscretization(kind, 32)
    g = Grid2D(32)
    u_exact, f = manufactured_problem(td, g)
    res = paradiag_solve(f, td, g, MultigridConfig(), jobs=4)
    assert res.converged
    u = res.stack()
    rel = np.linalg.norm(all_at_once_apply(build_B(td), u, g.h) - f) / np.linalg.norm(f)
    assert rel <= 1e-6
    # the discrete solution of the manufactured system is the sampled field itself
    assert np.linalg.norm(u - u_exact) <= 1e-6 * np.linalg.norm(u_exact)


def test_parallel_and_serial_agree():
    td = TimeDiscretization(HEAT_BVM, 16)
    g = Grid2D(16)
    _, f = manufactured_problem(td, g)
    a = paradiag_solve(f, td, g, MultigridConfig(), jobs=1).stack()
    b = paradiag_solve(f, td, g, MultigridConfig(), jobs=4).stack()
    assert np.array_equal(a, b)
