import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pqlab import DomainError, GridFunction, Params, eigenpair, find_solutions, lambda1, time_map
from pqlab.critical_values import beta_star
from pqlab.shooting import (count_roots, integrate_ivp, phi, phi_inverse, supersolution_defect,
                            weak_residual)

from . import oracles

# frozen from tests/oracles.py (arbitrary-precision first-integral quadrature)
T_THREE = {0.5: 0.9421587552225781, 1.0: 1.0003721022250045, 2.0: 0.9999804059431588}
T_OTHER = [((3.0, 2.0, 10.0, 5.0), 0.7, 1.4191073455269596),
           ((4.0, 1.5, 20.0, 4.0), 1.3, 1.3824085955422856)]
SLOPES_THREE = [0.9822525287767493, 1.675396189284989, 2.3909676429409563]
SLOPE_BETA_ONLY = 0.6217350131887638  # p=6, q=2, alpha=0, beta=pi^2+1


def test_phi_inverse_examples():
    assert phi_inverse(0.0, 6.0, 2.0) == 0.0
    assert phi_inverse(2.0, 6.0, 2.0) == pytest.approx(1.0, abs=1e-15)


def test_phi_inverse_round_trip_twelve_decades():
    w = np.logspace(-12, 6, 1000)
    for p, q in [(6.0, 2.0), (3.0, 1.5), (10.0, 4.0)]:
        t = phi_inverse(w, p, q)
        np.testing.assert_allclose(phi(t, p, q), w, rtol=1e-10)
        np.testing.assert_allclose(phi_inverse(-w, p, q), -t, rtol=0, atol=0)


@given(w=st.floats(-1e8, 1e8), p=st.floats(2.1, 10.0), r=st.floats(0.1, 0.9))
def test_phi_inverse_residual(w, p, r):
    q = 1.0 + r * (p - 1.5)
    t = phi_inverse(w, p, q)
    assert abs(phi(t, p, q) - w) <= 1e-12 * (1.0 + abs(w))


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_phi_inverse_rejects_nonfinite(bad):
    with pytest.raises(DomainError):
        phi_inverse(bad, 6.0, 2.0)


def test_hamiltonian_conserved(three_solution_params):
    for s in [0.3, 1.7, 5.0]:
        tr = integrate_ivp(three_solution_params, s)
        h = tr.hamiltonian(three_solution_params)
        assert np.max(np.abs(h - h[0])) <= 1e-8 * h[0]


@pytest.mark.parametrize("s", [1e-4, 1e-6])
def test_linear_limit_small_slope(s):
    # the q = 2 part dominates, so the trajectory approaches s sin(pi x) / pi
    T = time_map(Params(6.0, 2.0, 0.0, math.pi**2), s).T
    assert T == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("alpha, beta", [(0.0, 0.0), (-3.0, -1.0), (-1.0, 0.0)])
def test_no_return_without_positive_reaction(alpha, beta):
    tr = integrate_ivp(Params(6.0, 2.0, alpha, beta), 0.8, x_max=5.0)
    assert not tr.hit_zero
    assert math.isinf(time_map(Params(6.0, 2.0, alpha, beta), 0.8).T)


@pytest.mark.parametrize("s, value", sorted(T_THREE.items()))
def test_time_map_frozen_three_solution_point(three_solution_params, s, value):
    assert time_map(three_solution_params, s).T == pytest.approx(value, rel=1e-10)


@pytest.mark.parametrize("pars, s, value", T_OTHER)
def test_time_map_frozen_other(pars, s, value):
    assert time_map(Params(*pars), s).T == pytest.approx(value, rel=1e-10)


def test_time_map_against_live_oracle():
    pars = (5.0, 2.5, 3.0, 12.0)
    assert time_map(Params(*pars), 0.9).T == pytest.approx(oracles.time_map(*pars, 0.9), rel=1e-9)


def test_time_map_rejects_nonpositive_slope(three_solution_params):
    with pytest.raises(DomainError):
        time_map(three_solution_params, 0.0)


def test_three_solutions(three_solutions):
    sols = three_solutions
    assert len(sols) == 3
    np.testing.assert_allclose([s.slope for s in sols], SLOPES_THREE, rtol=1e-7)
    linf = [s.linf for s in sols]
    assert linf == sorted(linf)
    assert min(np.diff(linf)) > 1e-2
    for s in sols:
        assert s.is_valid()
        assert s.residual <= 1e-8
        assert s.symmetry_defect <= 1e-6 * s.linf
        assert np.all(s.u.values[1:-1] > 0)
        assert s.energy < 0


def test_solution_energy_matches_independent_quadrature(three_solutions):
    p = three_solutions[0].params
    for s in three_solutions:
        e = oracles.energy_of_profile(s.u.x, s.u.values, s.u.dvalues, p.p, p.q, p.alpha, p.beta)
        assert e == pytest.approx(s.energy, rel=1e-6)


def test_roots_satisfy_time_map(three_solutions, three_solution_params):
    for s in three_solutions:
        assert abs(time_map(three_solution_params, s.slope).T - 1.0) <= 1e-10


def test_count_stable_under_refinement(three_solution_params):
    assert count_roots(three_solution_params) == 3
    assert count_roots(three_solution_params, rtol=5e-11) == 3
    assert count_roots(three_solution_params, n_scan=800) == 3


def test_unique_solution_without_p_reaction(grid):
    sols = find_solutions(Params(6.0, 2.0, 0.0, math.pi**2 + 1), grid=grid)
    assert len(sols) == 1
    assert sols[0].slope == pytest.approx(SLOPE_BETA_ONLY, rel=1e-7)
    assert sols[0].energy < 0 and sols[0].is_valid()


def test_positive_energy_regime(small_grid):
    lam = lambda1(6.0)
    sols = find_solutions(Params(6.0, 2.0, lam + 50.0, 5.0), grid=small_grid)
    assert len(sols) >= 1
    assert all(s.energy > 0 for s in sols)


def test_negative_energy_regime(small_grid):
    sols = find_solutions(Params(6.0, 2.0, lambda1(6.0) - 100.0, 12.0), grid=small_grid)
    assert len(sols) >= 1
    assert all(s.energy < 0 for s in sols)


@pytest.mark.parametrize("alpha, beta", [(lambda1(6.0), lambda1(2.0)), (0.0, 5.0), (-10.0, -10.0)])
def test_no_roots_in_lower_left(alpha, beta):
    assert count_roots(Params(6.0, 2.0, alpha, beta)) == 0


def test_weak_residual_zero_function(grid):
    z = GridFunction(grid, np.zeros(grid.n_nodes))
    assert weak_residual(z, Params(6.0, 2.0, 1.0, 1.0)) == 0.0


def test_weak_residual_detects_non_solution(grid):
    phi_p = eigenpair(6.0, grid).phi
    pars = Params(6.0, 2.0, lambda1(6.0), beta_star(6.0, 2.0))
    assert weak_residual(phi_p, pars) > 0.01


def test_supersolution_defect_sign(three_solutions, three_solution_params):
    big = three_solutions[-1]
    # weakening the reaction turns a solution into a strict supersolution
    assert supersolution_defect(big.u, three_solution_params.with_(alpha=0.0)) > 0
    assert abs(supersolution_defect(big.u, three_solution_params)) <= 1e-8
