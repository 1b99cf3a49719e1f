import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pqlab import Grid, GridFunction, Params
from pqlab.discrete import DiscreteEnergy, P1Space, random_bump, solve_tridiag

from .conftest import positive_profile

SPACE = P1Space(Grid(129))


def test_grid_simpson_exact_for_cubics():
    for n in (17, 18, 129, 130):
        g = Grid(n)
        x = g.nodes
        assert g.integrate(4 * x**3 - 3 * x**2 + 2 * x + 1) == pytest.approx(2.0, abs=1e-13)


def test_grid_rejects_small():
    from pqlab import DomainError
    with pytest.raises(DomainError):
        Grid(5)


def test_gridfunction_immutable(small_grid):
    u = GridFunction(small_grid, np.sin(np.pi * small_grid.nodes))
    with pytest.raises(ValueError):
        u.values[3] = 1.0


# |t|^r is smooth enough for clean second differences when r = 2 or r >= 3
@given(seed=st.integers(0, 2**32 - 1), pos=st.booleans(),
       p=st.floats(4.0, 8.0), q=st.sampled_from([2.0, 3.0]), a=st.floats(-10, 500), b=st.floats(-5, 30))
def test_energy_gradient_and_hessian(seed, pos, p, q, a, b):
    rng = np.random.default_rng(seed)
    x = SPACE.restrict(GridFunction(SPACE.grid, positive_profile(SPACE.grid, rng)))
    x = x - 0.1 * x.max() * rng.uniform(0, 1)  # some negative entries for the positive part
    E = DiscreteEnergy(SPACE, Params(p, q, a, b), positive=pos)
    g = E.gradient(x)
    d = rng.standard_normal(x.size)
    eps = 1e-6
    fd = (E(x + eps * d) - E(x - eps * d)) / (2 * eps)
    assert fd == pytest.approx(float(g @ d), rel=1e-5, abs=1e-7 * (1 + np.abs(g) @ np.abs(d)))
    diag, off = E.hessian_bands(x)
    Hd = diag * d
    Hd[:-1] += off * d[1:]
    Hd[1:] += off * d[:-1]
    fd2 = (E.gradient(x + eps * d) - E.gradient(x - eps * d)) / (2 * eps)
    # the positive part is not twice differentiable at 0
    mask = np.ones(x.size, bool) if not pos else np.abs(x) > 1e-3
    mask[:-1] &= np.abs(x[1:]) > 1e-3 if pos else True
    mask[1:] &= np.abs(x[:-1]) > 1e-3 if pos else True
    np.testing.assert_allclose(fd2[mask], Hd[mask], rtol=1e-4,
                               atol=1e-6 * (1 + np.max(np.abs(Hd))))


def test_energy_identity():
    rng = np.random.default_rng(3)
    x = SPACE.restrict(GridFunction(SPACE.grid, positive_profile(SPACE.grid, rng)))
    E = DiscreteEnergy(SPACE, Params(6.0, 2.0, 300.0, 12.0))
    assert E(x) == pytest.approx(E.H(x) / 6 + E.G(x) / 2, rel=1e-13)


@given(seed=st.integers(0, 2**32 - 1), spd=st.booleans())
def test_solve_tridiag_matches_dense(seed, spd):
    rng = np.random.default_rng(seed)
    m = 40
    off = rng.uniform(-1, 1, m - 1)
    diag = 2.5 + rng.uniform(0, 1, m)
    rhs = rng.standard_normal(m)
    A = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    np.testing.assert_allclose(solve_tridiag(diag, off, rhs, spd), np.linalg.solve(A, rhs),
                               rtol=1e-10, atol=1e-12)


def test_laplacian_solve_inverts_dot():
    rng = np.random.default_rng(0)
    g = rng.standard_normal(SPACE.size)
    y = SPACE.solve_laplacian(g)
    e = np.zeros(SPACE.size)
    for i in (0, 17, SPACE.size - 1):
        e[:] = 0
        e[i] = 1
        assert SPACE.dot_laplacian(y, e) == pytest.approx(g[i], rel=1e-10)


def test_random_bump_positive():
    rng = np.random.default_rng(1)
    x = np.linspace(0, 1, 101)[1:-1]
    for _ in range(20):
        assert np.all(random_bump(rng, x) > 0)
