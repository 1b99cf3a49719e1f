import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from pqlab import DomainError, Grid, cos_p, eigenpair, lambda1, pi_p, sin_p
from pqlab.shooting import shooting_eigenvalue
from pqlab.special import pi_p_closed_form, sin_p_inverse_integral

from . import oracles

# frozen from tests/oracles.py
PI_6 = 2.0943951023931957
LAMBDA1 = {6.0: 422.0089738602162, 2.0: 9.869604401089358, 3.0: 28.28876197600255,
           1.5: 5.318718076379171}
SIN_INV = {(6.0, 0.5): 0.5001869319394975, (3.0, 0.9): 0.9820785038842093}


@pytest.mark.parametrize("p", [1.2, 1.5, 2.0, 3.0, 6.0, 10.0])
def test_pi_p_matches_closed_form(p):
    assert abs(pi_p(p) - oracles.pi_r(p)) <= 1e-10
    assert abs(pi_p(p) - pi_p_closed_form(p)) <= 1e-10


def test_pi_p_known_values():
    assert pi_p(2.0) == pytest.approx(math.pi, abs=1e-12)
    assert pi_p(6.0) == pytest.approx(PI_6, abs=1e-12)


@pytest.mark.parametrize("bad", [1.0, 0.5, -2.0, float("nan"), float("inf")])
def test_pi_p_rejects_bad_exponent(bad):
    with pytest.raises(DomainError):
        pi_p(bad)


@pytest.mark.parametrize("r, value", sorted(LAMBDA1.items()))
def test_lambda1_frozen(r, value):
    assert lambda1(r) == pytest.approx(value, rel=1e-12)


@pytest.mark.parametrize("r", [1.5, 2.0, 3.0, 6.0])
def test_lambda1_agrees_with_shooting(r):
    assert shooting_eigenvalue(r) == pytest.approx(lambda1(r), rel=1e-8)


def test_sin_p_peak_and_classical_case():
    assert sin_p(2.0, math.pi / 2) == pytest.approx(1.0, abs=1e-12)
    assert sin_p(6.0, pi_p(6.0) / 2) == pytest.approx(1.0, abs=1e-12)
    x = np.linspace(0, math.pi, 101)
    np.testing.assert_allclose(sin_p(2.0, x), np.sin(x), atol=1e-12)


def test_sin_p_against_ode_and_inverse_integral():
    p = 6.0
    x0 = pi_p(p) / 4

    def rhs(x, y):
        # y = (u, |u'|^{p-2} u'), rising branch so u' > 0
        return [y[1] ** (1.0 / (p - 1.0)), -(p - 1.0) * y[0] ** (p - 1.0)]

    sol = solve_ivp(rhs, (0.0, x0), [0.0, 1.0], method="DOP853", rtol=1e-13, atol=1e-15)
    y = sin_p(p, x0)
    assert abs(sol.y[0, -1] - y) <= 1e-8
    assert abs(oracles.sin_r_inverse(p, y) - x0) <= 1e-9


@pytest.mark.parametrize("key, value", sorted(SIN_INV.items()))
def test_inverse_integral_frozen(key, value):
    p, y = key
    assert sin_p_inverse_integral(p, y) == pytest.approx(value, abs=1e-13)


@given(p=st.floats(1.1, 12.0), frac=st.floats(0.0, 1.0))
def test_sin_p_symmetry_and_first_integral(p, frac):
    x = frac * pi_p(p)
    s, c = sin_p(p, x), cos_p(p, x)
    assert abs(s - sin_p(p, pi_p(p) - x)) <= 1e-9
    assert abs(abs(s) ** p + abs(c) ** p - 1.0) <= 1e-9
    assert 0.0 <= s <= 1.0 + 1e-12


@given(p=st.floats(1.1, 12.0))
def test_sin_p_monotone_on_rising_branch(p):
    x = np.linspace(0.0, pi_p(p) / 2, 200)
    y = sin_p(p, x)
    d = np.diff(y)
    assert np.all(d >= 0)
    # strict until y rounds to 1
    assert np.all(d[y[1:] < 1 - 1e-9] > 0)


def test_sin_p_outside_domain():
    with pytest.raises(DomainError):
        sin_p(3.0, pi_p(3.0) * 1.01)
    with pytest.raises(DomainError):
        sin_p(3.0, -0.1)


@pytest.mark.parametrize("r", [1.5, 2.0, 3.0, 6.0])
def test_eigenpair_normalized_and_rayleigh(r):
    ep = eigenpair(r)
    assert abs(ep.phi.grad_norm_pow(r) ** (1 / r) - 1.0) <= 1e-8
    assert ep.rayleigh_quotient() == pytest.approx(ep.lambda1, rel=1e-6)
    assert np.all(ep.phi.values[1:-1] > 0)
    assert ep.phi.symmetry_defect() <= 1e-12


def test_eigenpair_classical_shape():
    g = Grid(1025)
    ep = eigenpair(2.0, g)
    ref = np.sin(np.pi * g.nodes)
    ref /= math.sqrt(g.integrate((np.pi * np.cos(np.pi * g.nodes)) ** 2))
    np.testing.assert_allclose(ep.phi.values, ref, atol=1e-12)
