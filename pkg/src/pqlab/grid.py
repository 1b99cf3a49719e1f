"""Uniform grids on [0, 1] and sampled functions with node derivatives."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

DEFAULT_NODES = 4097


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative numerical method fails to converge.

    The best available iterate, when there is one, is attached as ``best``.
    """

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [0, 1] including both endpoints."""

    n_nodes: int = DEFAULT_NODES

    def __post_init__(self):
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 17:
            raise DomainError(f"grid needs an integer n_nodes >= 17, got {self.n_nodes}")

    @property
    def h(self) -> float:
        return 1.0 / (self.n_nodes - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.linspace(0.0, 1.0, self.n_nodes)
        x.flags.writeable = False
        return x

    @cached_property
    def weights(self) -> np.ndarray:
        """Composite Simpson weights; a 3/8 panel closes an odd interval count."""
        n_int = self.n_nodes - 1
        h = self.h
        w = np.zeros(self.n_nodes)
        m = n_int if n_int % 2 == 0 else n_int - 3
        w[0:m + 1:2] += 2.0
        w[1:m:2] += 4.0
        w[0] -= 1.0
        w[m] -= 1.0
        w[: m + 1] *= h / 3.0
        if m < n_int:
            w[m:] += 3.0 * h / 8.0 * np.array([1.0, 3.0, 3.0, 1.0])
        w.flags.writeable = False
        return w

    def integrate(self, f: np.ndarray) -> float:
        return float(np.dot(self.weights, f))

    def derivative(self, values: np.ndarray) -> np.ndarray:
        """Second-order central differences, one-sided at the endpoints."""
        h = self.h
        d = np.empty_like(values, dtype=float)
        d[1:-1] = (values[2:] - values[:-2]) / (2.0 * h)
        d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
        d[-1] = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * h)
        return d


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Node values and node derivatives of a function vanishing at 0 and 1.

    ``dvalues`` defaults to central differences of ``values``. Arrays are
    copied and frozen on construction.
    """

    grid: Grid
    values: np.ndarray
    dvalues: np.ndarray = field(default=None)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.n_nodes,):
            raise DomainError(f"expected {self.grid.n_nodes} node values, got shape {vals.shape}")
        if self.dvalues is None:
            dvals = self.grid.derivative(vals)
        else:
            dvals = np.array(self.dvalues, dtype=float)
            if dvals.shape != vals.shape:
                raise DomainError("values and dvalues must have the same shape")
        if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(dvals))):
            raise DomainError("grid function has non-finite entries")
        scale = 1.0 + np.max(np.abs(vals))
        if abs(vals[0]) > 1e-12 * scale or abs(vals[-1]) > 1e-12 * scale:
            raise DomainError("grid function violates the zero Dirichlet condition")
        vals[0] = vals[-1] = 0.0
        vals.flags.writeable = False
        dvals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "dvalues", dvals)

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    def scaled(self, c: float) -> "GridFunction":
        return GridFunction(self.grid, c * self.values, c * self.dvalues)

    def linf(self) -> float:
        return float(np.max(np.abs(self.values)))

    def norm_pow(self, r: float) -> float:
        """``||u||_r^r`` under the grid quadrature."""
        return self.grid.integrate(np.abs(self.values) ** r)

    def grad_norm_pow(self, r: float) -> float:
        """``||u'||_r^r`` under the grid quadrature."""
        return self.grid.integrate(np.abs(self.dvalues) ** r)

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.values - self.values[::-1])))
