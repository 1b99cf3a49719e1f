"""Generalized trigonometric functions and first eigenpairs of the r-Laplacian.

``sin_p`` solves ``(|u'|^{p-2} u')' + (p-1)|u|^{p-2} u = 0`` with ``u(0) = 0``,
``u'(0) = 1``. On its rising branch ``x = int_0^u (1 - t^p)^{-1/p} dt``, which
is an incomplete beta integral in ``t^p``; we invert it with the regularized
incomplete beta function and reflect about ``pi_p / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy import integrate
from scipy import special as sc

from .grid import DomainError, Grid, GridFunction


def _check_exponent(p: float, name: str = "p") -> float:
    p = float(p)
    if not np.isfinite(p) or p <= 1.0:
        raise DomainError(f"{name} must be a finite real > 1, got {p}")
    return p


@lru_cache(maxsize=256)
def pi_p(p: float) -> float:
    """Half period of ``sin_p``: ``2 * int_0^1 (1 - s^p)^{-1/p} ds``.

    The endpoint factor ``(1 - s)^{-1/p}`` goes into an algebraic quadrature
    weight (QUADPACK QAWS); what remains is smooth on [0, 1].
    """
    p = _check_exponent(p)

    def smooth_part(s):
        t = 1.0 - s
        if t <= 0.0:
            return p ** (-1.0 / p)
        return (-np.expm1(p * np.log1p(-t)) / t) ** (-1.0 / p)

    val, _ = integrate.quad(smooth_part, 0.0, 1.0, weight="alg", wvar=(0.0, -1.0 / p),
                            epsabs=1e-14, epsrel=1e-13, limit=200)
    return 2.0 * val


def pi_p_closed_form(p: float) -> float:
    p = _check_exponent(p)
    return 2.0 * np.pi / (p * np.sin(np.pi / p))


def _rising(p: float, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``sin_p`` and ``cos_p`` on the rising branch at ``x = y * pi_p / 2``.

    ``sin_p^p = I^{-1}(1/p, 1 - 1/p; y)`` and by the beta reflection
    ``cos_p^p = 1 - sin_p^p = I^{-1}(1 - 1/p, 1/p; 1 - y)``. Each form is
    evaluated where it does not cancel, and the other follows from
    ``sin_p^p + cos_p^p = 1``.
    """
    a, b = 1.0 / p, 1.0 - 1.0 / p
    y = np.asarray(y, dtype=float)
    low = y <= 0.5
    sp = np.empty_like(y)
    cp = np.empty_like(y)
    sp[low] = sc.betaincinv(a, b, y[low])
    cp[low] = 1.0 - sp[low]
    cp[~low] = sc.betaincinv(b, a, 1.0 - y[~low])
    sp[~low] = 1.0 - cp[~low]
    return sp ** (1.0 / p), cp ** (1.0 / p)


def _sin_cos_p(p: float, x) -> tuple[np.ndarray, np.ndarray]:
    p = _check_exponent(p)
    half = pi_p(p)
    x = np.asarray(x, dtype=float)
    tol = 1e-13 * half
    if np.any(x < -tol) or np.any(x > half + tol):
        raise DomainError(f"sin_p is defined here on [0, pi_p] = [0, {half}]")
    x = np.clip(x, 0.0, half)
    falling = x > 0.5 * half
    xr = np.where(falling, half - x, x)
    s, c = _rising(p, 2.0 * xr / half)
    c = np.where(falling, -c, c)
    return s, c


def sin_p(p: float, x):
    """Generalized sine on ``[0, pi_p]``; scalar in, scalar out."""
    s, _ = _sin_cos_p(p, x)
    return float(s) if s.ndim == 0 else s


def cos_p(p: float, x):
    """Derivative of ``sin_p``; satisfies ``|sin_p|^p + |cos_p|^p = 1``."""
    _, c = _sin_cos_p(p, x)
    return float(c) if c.ndim == 0 else c


def sin_p_inverse_integral(p: float, u: float) -> float:
    """``int_0^u (1 - t^p)^{-1/p} dt`` for ``0 <= u <= 1`` by direct quadrature."""
    p = _check_exponent(p)
    with mpmath.workdps(40):
        pm = mpmath.mpf(p)
        val = mpmath.quad(lambda t: (1 - t**pm) ** (-1 / pm), [0, mpmath.mpf(u)])
    return float(val)


def lambda1(r: float) -> float:
    """First Dirichlet eigenvalue of the r-Laplacian on (0, 1)."""
    r = _check_exponent(r, "r")
    return (r - 1.0) * pi_p(r) ** r


@dataclass(frozen=True, eq=False)
class EigenPair:
    r: float
    lambda1: float
    phi: GridFunction

    def rayleigh_quotient(self) -> float:
        return self.phi.grad_norm_pow(self.r) / self.phi.norm_pow(self.r)


def eigenpair(r: float, grid: Grid | None = None) -> EigenPair:
    """First eigenpair with ``phi > 0`` and ``||phi'||_r = 1`` on the grid."""
    r = _check_exponent(r, "r")
    grid = grid or Grid()
    half = pi_p(r)
    s, c = _sin_cos_p(r, half * grid.nodes)
    s[0] = s[-1] = 0.0
    raw = GridFunction(grid, s, half * c)
    # phi' scales linearly with the amplitude, so one division normalizes
    amp = raw.grad_norm_pow(r) ** (-1.0 / r)
    return EigenPair(r=r, lambda1=lambda1(r), phi=raw.scaled(amp))
