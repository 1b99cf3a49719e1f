import logging
import math

import numpy as np
import pytest

from pqlab import DomainError, GridFunction, Params, energy, find_solutions, lambda1
from pqlab.critical_values import beta_star
from pqlab.fiber import G_beta, H_alpha
from pqlab.shooting import weak_residual
from pqlab.variational import (global_minimize, minimize_truncated, mountain_pass, path_xi,
                               tilde_energy, tilde_gradient, truncated_energy, xi)

from .conftest import positive_profile


def rel_linf(a, b):
    return float(np.max(np.abs(a.values - b.values)) / b.linf())


def closest(u, sols):
    return min(sols, key=lambda s: rel_linf(u, s.u))


# ---------------------------------------------------------------- tilde energy


def test_tilde_energy_equals_energy_for_nonnegative(small_grid, three_solution_params):
    rng = np.random.default_rng(0)
    for _ in range(5):
        u = GridFunction(small_grid, positive_profile(small_grid, rng))
        assert tilde_energy(u, three_solution_params) == pytest.approx(
            energy(u, three_solution_params), rel=1e-12)


def test_tilde_energy_positive_for_nonpositive(small_grid, three_solution_params):
    rng = np.random.default_rng(1)
    u = GridFunction(small_grid, -positive_profile(small_grid, rng))
    assert tilde_energy(u, three_solution_params) > 0


def test_tilde_energy_against_direct_quadrature(small_grid, three_solution_params):
    from scipy.integrate import simpson
    pars = three_solution_params
    x = small_grid.nodes
    u = GridFunction(small_grid, np.sin(3 * np.pi * x) * (1 + x))
    du = np.gradient(u.values, x, edge_order=2)
    up = np.maximum(u.values, 0)
    ref = simpson(np.abs(du) ** 6 / 6 + du**2 / 2 - pars.alpha * up**6 / 6
                  - pars.beta * up**2 / 2, x=x)
    assert tilde_energy(u, pars) == pytest.approx(ref, rel=1e-4)


def test_tilde_gradient_matches_finite_differences(small_grid, three_solution_params):
    rng = np.random.default_rng(2)
    eps = 1e-6
    for _ in range(20):
        vals = positive_profile(small_grid, rng) * (1 + 2 * np.sin(5 * np.pi * small_grid.nodes))
        u = GridFunction(small_grid, vals)
        d = np.zeros_like(vals)
        d[1:-1] = rng.standard_normal(vals.size - 2)
        g = tilde_gradient(u, three_solution_params)
        fd = (tilde_energy(GridFunction(small_grid, vals + eps * d), three_solution_params)
              - tilde_energy(GridFunction(small_grid, vals - eps * d), three_solution_params)) / (2 * eps)
        assert fd == pytest.approx(float(g @ d[1:-1]), rel=1e-5)


def test_truncated_energy_agrees_inside_interval(three_solutions, three_solution_params):
    w = three_solutions[-1].u
    u = three_solutions[0].u
    assert truncated_energy(u, w, three_solution_params) == pytest.approx(
        energy(u, three_solution_params), rel=1e-12)


# ---------------------------------------------------------------- truncated minimization


@pytest.fixture(scope="module")
def supersolution(three_solution_params, grid):
    up = find_solutions(three_solution_params.with_(beta=three_solution_params.beta + 0.05), grid=grid)
    return up[-1].u


def test_minimize_truncated_recovers_largest(supersolution, three_solutions, three_solution_params):
    sol = minimize_truncated(supersolution, three_solution_params)
    assert sol.energy < 0
    assert sol.residual <= 1e-6
    assert np.all(sol.u.values[1:-1] > 0)
    assert np.all(sol.u.values <= supersolution.values + 1e-8)
    match = closest(sol.u, three_solutions)
    assert rel_linf(sol.u, match.u) <= 1e-3


def test_minimize_truncated_rejects_subsolution(three_solutions, three_solution_params):
    w = three_solutions[-1].u
    with pytest.raises(DomainError):
        minimize_truncated(w, three_solution_params.with_(beta=three_solution_params.beta + 1.0))


def test_minimize_truncated_rejects_small_beta(supersolution):
    with pytest.raises(DomainError):
        minimize_truncated(supersolution, Params(6.0, 2.0, 100.0, 5.0))


# ---------------------------------------------------------------- global minimization


def test_global_minimize_unique_regime(grid):
    pars = Params(6.0, 2.0, 0.0, math.pi**2 + 1)
    shot = find_solutions(pars, grid=grid)
    sol = global_minimize(pars, grid)
    assert len(shot) == 1
    assert rel_linf(sol.u, shot[0].u) <= 1e-3
    assert sol.energy < 0
    assert abs(H_alpha(sol.u, pars) + G_beta(sol.u, pars)) <= 1e-8 * sol.u.grad_norm_pow(6.0)
    assert sol.residual <= 1e-6


def test_global_minimize_lowest_energy(three_solutions, three_solution_params, grid):
    sol = global_minimize(three_solution_params, grid)
    assert all(sol.energy <= s.energy + 1e-6 for s in three_solutions)
    assert rel_linf(sol.u, closest(sol.u, three_solutions).u) <= 1e-3


@pytest.mark.parametrize("alpha, beta", [(lambda1(6.0) + 1, 12.0), (100.0, 9.0)])
def test_global_minimize_preconditions(alpha, beta, small_grid):
    with pytest.raises(DomainError):
        global_minimize(Params(6.0, 2.0, alpha, beta), small_grid)


def test_global_minimize_deterministic(small_grid):
    pars = Params(6.0, 2.0, 300.0, 11.0)
    a = global_minimize(pars, small_grid, seed=3)
    b = global_minimize(pars, small_grid, seed=3)
    np.testing.assert_array_equal(a.u.values, b.u.values)


# ---------------------------------------------------------------- path


def test_xi_endpoints_and_constant_path(three_solutions):
    u, v = three_solutions[0].u, three_solutions[2].u
    assert xi(u, v, 0.0, 2.0) is u and xi(u, v, 1.0, 2.0) is v
    for s in (0.2, 0.7):
        np.testing.assert_allclose(xi(u, u, s, 2.0).values, u.values, rtol=1e-14)


def test_path_hidden_convexity(three_solutions, three_solution_params):
    u, v = three_solutions[0].u, three_solutions[2].u
    path = path_xi(u, v, 41, three_solution_params)
    g_end = max(path[0].G_value, path[-1].G_value)
    assert all(smp.G_value <= g_end + 1e-8 for smp in path)
    assert path[0].s == 0.0 and path[-1].s == 1.0
    for smp in path:
        assert smp.point.values[0] == smp.point.values[-1] == 0.0
        assert np.isfinite(smp.energy)


def test_path_rejects_negative(three_solutions, three_solution_params):
    u = three_solutions[0].u
    with pytest.raises(DomainError):
        path_xi(u, u.scaled(-1.0), 5, three_solution_params)


# ---------------------------------------------------------------- mountain pass


def test_mountain_pass_finds_middle(three_solutions, three_solution_params):
    u1, v1 = three_solutions[0], three_solutions[2]
    sol = mountain_pass(u1, three_solution_params, v1=v1.u)
    assert rel_linf(sol.u, three_solutions[1].u) <= 1e-3
    assert u1.energy - 1e-8 <= sol.energy < 0
    assert sol.residual <= 1e-6 and np.all(sol.u.values[1:-1] > 0)


def test_mountain_pass_truncated_path(grid, caplog):
    # between beta_*(alpha) and the existence threshold, past the first eigenvalue
    pars = Params(6.0, 2.0, lambda1(6.0) + 1.0, 11.3)
    shot = find_solutions(pars, grid=grid)
    assert len(shot) == 2 and all(s.energy < 0 for s in shot)
    with caplog.at_level(logging.INFO, logger="pqlab.variational"):
        sol = mountain_pass(shot[0], pars)
    assert "truncat" in caplog.text
    assert rel_linf(sol.u, shot[1].u) <= 1e-3
    assert shot[0].energy - 1e-8 <= sol.energy < 0


def test_mountain_pass_preconditions(three_solutions, grid):
    p = Params(6.0, 2.0, lambda1(6.0), beta_star(6.0, 2.0))
    with pytest.raises(DomainError):
        mountain_pass(three_solutions[0], p)
    pos = find_solutions(Params(6.0, 2.0, lambda1(6.0) + 50.0, 5.0), grid=grid)[0]
    with pytest.raises(DomainError):
        mountain_pass(pos, pos.params)


def test_variational_residual_uses_shared_gate(three_solutions, three_solution_params):
    sol = minimize_truncated(three_solutions[-1].u, three_solution_params.with_(beta=three_solution_params.beta - 0.01))
    assert weak_residual(sol.u, sol.params) == sol.residual
