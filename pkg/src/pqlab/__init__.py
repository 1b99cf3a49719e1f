"""Positive solutions of -Delta_p u - Delta_q u = alpha |u|^{p-2} u + beta |u|^{q-2} u on (0, 1).

Shooting, variational and sweep tools for the one-dimensional (p,q)-Laplacian
with zero Dirichlet data.
"""

from .critical_values import CriticalCurveSample, alpha_star, beta_star, beta_star_curve
from .fiber import FiberReport, Params, energy, fiber_report, fibered_J, nehari_project, t_star
from .grid import ConvergenceError, DomainError, Grid, GridFunction
from .shooting import Solution, find_solutions, time_map, weak_residual
from .special import cos_p, eigenpair, lambda1, pi_p, sin_p

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError", "CriticalCurveSample", "DomainError", "FiberReport", "Grid",
    "GridFunction", "Params", "Solution", "alpha_star", "beta_star", "beta_star_curve",
    "cos_p", "eigenpair", "energy", "fiber_report", "fibered_J", "find_solutions",
    "lambda1", "nehari_project", "pi_p", "sin_p", "t_star", "time_map", "weak_residual",
]
