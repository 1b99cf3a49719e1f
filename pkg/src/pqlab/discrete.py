"""Piecewise-linear discretization used by the optimizers.

Unknowns are the interior node values. Derivatives are cell slopes and the
``L^r`` masses use the trapezoid rule, so gradient terms have no
checkerboard null modes and every Hessian is tridiagonal.

``A_r(u) = h sum_cells |u'|^r`` and ``B_r(u) = h sum_nodes |u|^r``; the
``positive`` variants replace ``u`` by ``max(u, 0)`` in ``B_r``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .fiber import Params
from .grid import Grid, GridFunction


def _spow(t: np.ndarray, e: float) -> np.ndarray:
    return np.sign(t) * np.abs(t) ** e


@dataclass(frozen=True)
class P1Space:
    grid: Grid

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def size(self) -> int:
        return self.grid.n_nodes - 2

    def full(self, x: np.ndarray) -> np.ndarray:
        return np.concatenate(([0.0], x, [0.0]))

    def slopes(self, x: np.ndarray) -> np.ndarray:
        return np.diff(self.full(x)) / self.h

    def restrict(self, u: GridFunction) -> np.ndarray:
        return np.array(u.values[1:-1])

    def to_grid_function(self, x: np.ndarray) -> GridFunction:
        return GridFunction(self.grid, self.full(x))

    # --- building blocks -------------------------------------------------

    def A(self, x: np.ndarray, r: float) -> float:
        return self.h * float(np.sum(np.abs(self.slopes(x)) ** r))

    def B(self, x: np.ndarray, r: float, positive: bool = False) -> float:
        y = np.maximum(x, 0.0) if positive else x
        return self.h * float(np.sum(np.abs(y) ** r))

    def grad_A(self, x: np.ndarray, r: float) -> np.ndarray:
        psi = _spow(self.slopes(x), r - 1.0)
        return r * (psi[:-1] - psi[1:])

    def grad_B(self, x: np.ndarray, r: float, positive: bool = False) -> np.ndarray:
        y = np.maximum(x, 0.0) if positive else x
        return self.h * r * _spow(y, r - 1.0)

    def stiffness_bands(self, x: np.ndarray, r: float, reg: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
        """Diagonal and off-diagonal of the Hessian of ``A_r``.

        ``reg`` floors ``|u'|`` inside ``|u'|^{r-2}`` so that ``r < 2`` stays finite.
        """
        d = np.abs(self.slopes(x))
        if r < 2.0:
            d = np.maximum(d, reg) if reg > 0.0 else np.maximum(d, 1e-12)
        c = r * (r - 1.0) / self.h * d ** (r - 2.0)
        return c[:-1] + c[1:], -c[1:-1]

    def mass_diag(self, x: np.ndarray, r: float, positive: bool = False) -> np.ndarray:
        y = np.maximum(x, 0.0) if positive else np.abs(x)
        if r < 2.0:
            y = np.maximum(y, 1e-12)
        return self.h * r * (r - 1.0) * y ** (r - 2.0)

    def laplacian_bands(self) -> tuple[np.ndarray, np.ndarray]:
        m = self.size
        return np.full(m, 2.0 / self.h), np.full(m - 1, -1.0 / self.h)

    def solve_laplacian(self, g: np.ndarray) -> np.ndarray:
        diag, off = self.laplacian_bands()
        return solve_tridiag(diag, off, g)

    def dot_laplacian(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(np.dot(np.diff(self.full(a)), np.diff(self.full(b))) / self.h)


def random_bump(rng: np.random.Generator, x: np.ndarray) -> np.ndarray:
    """Positive Gaussian bump times ``x (1 - x)`` with random center and width."""
    c = rng.uniform(0.2, 0.8)
    w = rng.uniform(0.05, 0.3)
    return x * (1 - x) * np.exp(-0.5 * ((x - c) / w) ** 2)


def solve_tridiag(diag: np.ndarray, off: np.ndarray, rhs: np.ndarray, symmetric_pd: bool = False):
    """Solve a symmetric tridiagonal system; banded Cholesky when asked."""
    m = diag.size
    if symmetric_pd:
        ab = np.zeros((2, m))
        ab[0, 1:] = off
        ab[1] = diag
        return linalg.solveh_banded(ab, rhs, check_finite=False)
    ab = np.zeros((3, m))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    return linalg.solve_banded((1, 1), ab, rhs, check_finite=False)


@dataclass(frozen=True)
class DiscreteEnergy:
    """P1 energy ``A_p/p + A_q/q - alpha B_p/p - beta B_q/q``.

    ``positive=True`` gives the positive-part functional.
    """

    space: P1Space
    params: Params
    positive: bool = True

    def __call__(self, x: np.ndarray) -> float:
        s, P = self.space, self.params
        return (s.A(x, P.p) / P.p + s.A(x, P.q) / P.q
                - P.alpha * s.B(x, P.p, self.positive) / P.p
                - P.beta * s.B(x, P.q, self.positive) / P.q)

    def H(self, x: np.ndarray) -> float:
        s, P = self.space, self.params
        return s.A(x, P.p) - P.alpha * s.B(x, P.p, self.positive)

    def G(self, x: np.ndarray) -> float:
        s, P = self.space, self.params
        return s.A(x, P.q) - P.beta * s.B(x, P.q, self.positive)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        s, P = self.space, self.params
        return (s.grad_A(x, P.p) / P.p + s.grad_A(x, P.q) / P.q
                - P.alpha * s.grad_B(x, P.p, self.positive) / P.p
                - P.beta * s.grad_B(x, P.q, self.positive) / P.q)

    def hessian_bands(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        s, P = self.space, self.params
        dp, op = s.stiffness_bands(x, P.p)
        dq, oq = s.stiffness_bands(x, P.q)
        diag = (dp / P.p + dq / P.q
                - P.alpha * s.mass_diag(x, P.p, self.positive) / P.p
                - P.beta * s.mass_diag(x, P.q, self.positive) / P.q)
        return diag, op / P.p + oq / P.q

    def dual_norm(self, g: np.ndarray) -> float:
        """``H^{-1}``-type norm of a gradient: ``sqrt(g . K^{-1} g)``."""
        return float(np.sqrt(max(np.dot(g, self.space.solve_laplacian(g)), 0.0)))
