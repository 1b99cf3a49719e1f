from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pqlab import Grid, Params, beta_star, find_solutions, lambda1

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

P, Q = 6.0, 2.0


@pytest.fixture(scope="session")
def grid() -> Grid:
    return Grid()


@pytest.fixture(scope="session")
def small_grid() -> Grid:
    return Grid(513)


@pytest.fixture(scope="session")
def three_solution_params() -> Params:
    """alpha just below the first p-eigenvalue, beta just above beta_*."""
    return Params(P, Q, lambda1(P) - 0.1, beta_star(P, Q) + 0.1)


@pytest.fixture(scope="session")
def three_solutions(three_solution_params, grid):
    return find_solutions(three_solution_params, grid=grid)


def positive_profile(grid: Grid, rng: np.random.Generator):
    """Random positive bump vanishing at both ends."""
    x = grid.nodes
    c = rng.uniform(0.25, 0.75)
    w = rng.uniform(0.08, 0.4)
    amp = rng.uniform(0.2, 5.0)
    return amp * x * (1 - x) * np.exp(-0.5 * ((x - c) / w) ** 2) * (1 + 0.3 * np.sin(3 * np.pi * x) ** 2)


# ---------------------------------------------------------------- acceptance report

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {text}")
