import math

import numpy as np
import pytest
from scipy.integrate import quad

from pqlab import DomainError, Grid, Params, alpha_star, beta_star, beta_star_curve, eigenpair, lambda1
from pqlab.fiber import G_beta, H_alpha

from . import oracles

# frozen from tests/oracles.py (Beta-function closed forms)
BETA_STAR = {(6.0, 2.0): 11.3217808822533, (3.0, 2.0): 10.332459605897647}
ALPHA_STAR = {(6.0, 2.0): 961.3891935753043, (3.0, 2.0): 31.006276680299816}


@pytest.mark.parametrize("pq, value", sorted(BETA_STAR.items()))
def test_beta_star_frozen(pq, value):
    assert beta_star(*pq) == pytest.approx(value, rel=1e-10)


@pytest.mark.parametrize("pq, value", sorted(ALPHA_STAR.items()))
def test_alpha_star_frozen(pq, value):
    assert alpha_star(*pq) == pytest.approx(value, rel=1e-10)


@pytest.mark.parametrize("p, q", [(6.0, 2.0), (3.0, 2.0), (4.0, 1.5), (10.0, 3.0), (2.5, 1.2)])
def test_cross_quotients_against_oracle_and_bounds(p, q):
    assert beta_star(p, q) == pytest.approx(oracles.cross_quotient(p, q), rel=1e-9)
    assert alpha_star(p, q) == pytest.approx(oracles.cross_quotient(q, p), rel=1e-9)
    assert beta_star(p, q) > lambda1(q)
    assert alpha_star(p, q) > lambda1(p)


def test_sine_cosine_power_identity():
    for p in (3.0, 6.0, 7.5):
        s, _ = quad(lambda x: abs(math.sin(math.pi * x)) ** p, 0, 1, epsabs=1e-14)
        c, _ = quad(lambda x: abs(math.cos(math.pi * x)) ** p, 0, 1, epsabs=1e-14, points=[0.5])
        assert s == pytest.approx(c, rel=1e-12)
    assert alpha_star(6.0, 2.0) == pytest.approx(math.pi**6, rel=1e-10)


@pytest.mark.parametrize("n", [1025, 4097])
def test_grid_consistent_values_zero_the_functionals(n):
    g = Grid(n)
    phi_p, phi_q = eigenpair(6.0, g).phi, eigenpair(2.0, g).phi
    b, a = beta_star(6.0, 2.0, g), alpha_star(6.0, 2.0, g)
    assert abs(G_beta(phi_p, Params(6.0, 2.0, 0.0, b))) <= 1e-10 * phi_p.grad_norm_pow(2.0)
    assert abs(H_alpha(phi_q, Params(6.0, 2.0, a, 0.0))) <= 1e-10 * phi_q.grad_norm_pow(6.0)
    # grid values converge to the continuum ones
    assert b == pytest.approx(beta_star(6.0, 2.0), rel=2e-5 * (4097 / n) ** 1.4)
    assert a == pytest.approx(alpha_star(6.0, 2.0), rel=1e-8)


def test_domain_errors():
    with pytest.raises(DomainError):
        beta_star(2.0, 3.0)
    with pytest.raises(DomainError):
        alpha_star(2.0, 1.0)
    with pytest.raises(DomainError):
        beta_star_curve(lambda1(6.0) - 1.0, 6.0, 2.0, Grid(257))


@pytest.fixture(scope="module")
def coarse_curve():
    g = Grid(1025)
    lam, ast = lambda1(6.0), alpha_star(6.0, 2.0)
    alphas = [lam, lam + 5.0, lam + 60.0, 0.5 * (lam + ast), ast, ast + 100.0]
    return [beta_star_curve(a, 6.0, 2.0, g) for a in alphas]


def test_curve_endpoints(coarse_curve):
    assert coarse_curve[0].beta_star_alpha == pytest.approx(beta_star(6.0, 2.0), rel=1e-4)
    for c in coarse_curve[-2:]:
        assert c.beta_star_alpha == pytest.approx(lambda1(2.0), rel=1e-4)


def test_curve_nonincreasing_and_bounded(coarse_curve):
    vals = np.array([c.beta_star_alpha for c in coarse_curve])
    assert np.all(np.diff(vals) <= 1e-6)
    assert np.all(vals >= lambda1(2.0) * (1 - 1e-6))
    assert np.all(vals <= beta_star(6.0, 2.0) * (1 + 1e-6))


def test_curve_minimizer_feasible_and_positive(coarse_curve):
    for c in coarse_curve:
        assert c.constraint <= 1e-9
        assert np.all(c.minimizer.values[1:-1] > 0)
        assert abs(c.minimizer.grad_norm_pow(6.0) - 1.0) < 1e-2


def test_interior_curve_point_converges(coarse_curve):
    c = coarse_curve[2]
    assert c.converged and c.starts_agree
    # active constraint in the interior
    assert abs(c.constraint) <= 1e-9


def test_curve_deterministic():
    g = Grid(257)
    a = lambda1(6.0) + 30.0
    c1 = beta_star_curve(a, 6.0, 2.0, g, seed=7)
    c2 = beta_star_curve(a, 6.0, 2.0, g, seed=7)
    assert c1.beta_star_alpha == c2.beta_star_alpha
    np.testing.assert_array_equal(c1.minimizer.values, c2.minimizer.values)
